"""Model-ready datasets built from TKE series and aligned frames."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ingest import FEATURE_NAMES, BurnPhase, Frames
from .turbulence import TkeSeries


@dataclass(frozen=True)
class Scaler:
    """Per-column z-score transform; ``identity`` leaves columns untouched."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X) -> "Scaler":
        X = np.asarray(X, dtype=float)
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        if np.any(std <= 0):
            cols = np.flatnonzero(std <= 0).tolist()
            raise ValueError(f"cannot standardize constant feature column(s) {cols}")
        return cls(mean, std)

    @classmethod
    def identity(cls, n_features: int) -> "Scaler":
        return cls(np.zeros(n_features), np.ones(n_features))

    @property
    def is_identity(self) -> bool:
        return bool(np.all(self.mean == 0) and np.all(self.std == 1))

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.is_identity:
            return X
        return (X - self.mean) / self.std


@dataclass(frozen=True)
class Dataset:
    """Feature matrix T1..T7, sonic_T with a TKE target.

    ``source`` tags every row with the dataset it came from, which survives
    :func:`firetke.evaluate.combine_datasets`.
    """

    X: np.ndarray
    y: np.ndarray
    t: np.ndarray | None = None
    source: np.ndarray | None = None
    name: str = "dataset"
    feature_names: tuple = FEATURE_NAMES
    target_name: str = "tke_ma"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2 or X.shape[1] != len(self.feature_names):
            raise ValueError(f"X must be (N, {len(self.feature_names)}), got {X.shape}")
        if len(y) != len(X):
            raise ValueError(f"X has {len(X)} rows but y has {len(y)}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite values")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.source is None:
            object.__setattr__(self, "source", np.full(len(y), self.name, dtype=object))
        if self.t is not None:
            object.__setattr__(self, "t", np.asarray(self.t, dtype=float))

    def __len__(self):
        return len(self.y)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.X[idx], self.y[idx], None if self.t is None else self.t[idx],
                       self.source[idx], self.name, self.feature_names, self.target_name,
                       dict(self.meta))

    def columns(self):
        """Features plus target as one (N, 9) array with labels, for correlation."""
        return np.column_stack([self.X, self.y]), self.feature_names + (self.target_name,)


def build_dataset(frames: Frames, series: TkeSeries, target: str = "tke_ma",
                  phase: BurnPhase | None = BurnPhase.BURN, name: str = "dataset") -> Dataset:
    """Rows from one phase (burn by default) whose target is defined."""
    y = series.target(target)
    mask = ~np.isnan(y)
    if phase is not None:
        if frames.phase is None:
            raise ValueError("frames must be segmented before building a dataset")
        mask &= frames.phase == int(phase)
    return Dataset(frames.features[mask], y[mask], frames.t[mask], name=name,
                   target_name=target)
