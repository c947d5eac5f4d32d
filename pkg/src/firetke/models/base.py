"""Common model interface: configs, trained models, batch prediction, persistence.

Saved models are ``.npz`` archives. The ``__meta__`` entry is a JSON
document::

    {"format": "firetke-model", "version": 1, "kind": "...",
     "config": {"kind", "params", "seed", "standardize"},
     "state": {...kind-specific scalars...}}

All other entries are arrays: ``scaler/mean``, ``scaler/std`` and
``state/<name>`` for the kind-specific fitted arrays.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .._io import atomic_write_bytes
from ..data import Dataset, Scaler
from .boosting import GradientBoostingRegressor, RegularizedBoostingRegressor
from .forest import RandomForestRegressor
from .gpr import ElasticNetGPRegressor, GaussianProcessRegressor
from .knn import KNNRegressor
from .mlp import MLPRegressor

FORMAT = "firetke-model"
FORMAT_VERSION = 1

# kind -> (estimator class, standardize features by default, takes a seed)
REGISTRY = {
    "dnn": (MLPRegressor, True, True),
    "rfr": (RandomForestRegressor, False, True),
    "knn": (KNNRegressor, True, False),
    "gbr": (GradientBoostingRegressor, False, False),
    "gpr": (GaussianProcessRegressor, True, False),
    "xgb": (RegularizedBoostingRegressor, False, False),
    "gpr_enet": (ElasticNetGPRegressor, True, False),
}
DEFAULT_KINDS = ("dnn", "rfr", "knn", "gbr", "gpr", "xgb")
DISPLAY_NAMES = {"dnn": "DNN", "rfr": "RFR", "knn": "KNN", "gbr": "GBR", "gpr": "GPR",
                 "xgb": "XGB", "gpr_enet": "GPR-EN"}


@dataclass(frozen=True)
class ModelConfig:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    standardize: bool | None = None

    def __post_init__(self):
        if self.kind not in REGISTRY:
            raise ValueError(f"unknown model kind {self.kind!r}; known: {sorted(REGISTRY)}")
        if self.standardize is None:
            object.__setattr__(self, "standardize", REGISTRY[self.kind][1])
        # lists from JSON/TOML become tuples so reloaded configs compare equal
        object.__setattr__(self, "params", {k: _freeze(v) for k, v in self.params.items()})
        self.build()  # validates hyperparameters

    def build(self, n_jobs=1):
        cls, _, seeded = REGISTRY[self.kind]
        params = dict(self.params)
        if seeded:
            params.setdefault("seed", self.seed)
        if self.kind == "rfr":
            params.setdefault("n_jobs", n_jobs)
        try:
            return cls(**params)
        except TypeError as exc:
            raise ValueError(f"bad hyperparameters for {self.kind}: {exc}") from None

    def to_dict(self):
        return {"kind": self.kind, "params": _jsonable(self.params), "seed": self.seed,
                "standardize": self.standardize}

    def label(self) -> str:
        if not self.params:
            return "defaults"
        return ", ".join(f"{k}={_jsonable(v)}" for k, v in sorted(self.params.items()))


def _freeze(v):
    return tuple(_freeze(x) for x in v) if isinstance(v, (list, tuple)) else v


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    return v


@dataclass
class TrainedModel:
    config: ModelConfig
    scaler: Scaler
    estimator: object

    @property
    def kind(self) -> str:
        return self.config.kind

    @property
    def loss_trace(self) -> np.ndarray:
        return np.asarray(getattr(self.estimator, "loss_trace", np.empty(0)))

    def predict(self, X) -> np.ndarray:
        return predict_batch(self, X)


def fit_model(data, config: ModelConfig, y=None, n_jobs=1) -> TrainedModel:
    """Fit ``config`` on a Dataset (or an ``X, y`` pair)."""
    if isinstance(data, Dataset):
        X, y = data.X, data.y
    else:
        X, y = np.asarray(data, dtype=float), np.asarray(y, dtype=float)
    scaler = Scaler.fit(X) if config.standardize else Scaler.identity(X.shape[1])
    est = config.build(n_jobs=n_jobs)
    est.fit(scaler.transform(X), y)
    return TrainedModel(config, scaler, est)


def predict_batch(model: TrainedModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n_features = len(model.scaler.mean)
    if X.shape[1] != n_features:
        raise ValueError(f"model expects {n_features} feature columns, got {X.shape[1]}")
    return np.asarray(model.estimator.predict(model.scaler.transform(X)), dtype=float)


def save_model(model: TrainedModel, path) -> None:
    meta_state, arrays = model.estimator.get_state()
    meta = {"format": FORMAT, "version": FORMAT_VERSION, "kind": model.kind,
            "config": model.config.to_dict(), "state": _jsonable(meta_state)}
    payload = {"__meta__": np.array(json.dumps(meta, sort_keys=True)),
               "scaler/mean": model.scaler.mean, "scaler/std": model.scaler.std}
    payload.update({f"state/{k}": v for k, v in arrays.items()})
    buf = io.BytesIO()
    np.savez(buf, **payload)
    atomic_write_bytes(path, buf.getvalue())


def load_model(path) -> TrainedModel:
    with np.load(Path(path), allow_pickle=False) as z:
        meta = json.loads(str(z["__meta__"]))
        if meta.get("format") != FORMAT:
            raise ValueError(f"{path}: not a firetke model file")
        if meta.get("version") != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported model format version {meta.get('version')}")
        arrays = {k[len("state/"):]: z[k] for k in z.files if k.startswith("state/")}
        scaler = Scaler(z["scaler/mean"], z["scaler/std"])
    c = meta["config"]
    config = ModelConfig(c["kind"], c["params"], c["seed"], c["standardize"])
    est = REGISTRY[meta["kind"]][0].from_state(meta["state"], arrays)
    return TrainedModel(config, scaler, est)
