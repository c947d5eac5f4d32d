"""Declarative run configuration (TOML) with command-line overrides.

Example::

    seed = 7
    out = "results"
    target = "tke_ma"          # or "tke"
    clip = 50.0
    clip_on = "wind"           # "wind", "sonic_T" or "both"
    window = 10
    tolerance = 0.05
    time_origin = "relative"   # or "epoch"
    models = ["dnn", "rfr", "knn", "gbr", "gpr", "xgb"]
    n_jobs = 1
    combine = [["B1", "C1"]]   # extra datasets built by row concatenation

    [split]
    strategy = "random"        # or "chrono"
    fractions = [0.7, 0.15, 0.15]

    [[dataset]]
    name = "B1"
    sonic = "B1_sonic.csv"
    thermo = "B1_thermo.csv"
    burn_start = 300.0
    burn_end = 1500.0

    [grids.knn]
    k = [3, 5, 10, 20]

    [grids.rfr]
    max_depth = [6, "none"]    # "none" means unlimited

A single dataset may also be given with top-level ``sonic``, ``thermo``,
``burn_start``, ``burn_end`` and ``name`` keys. Relative paths resolve
against the config file's directory.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError
from .evaluate import SplitSpec
from .ingest import DEFAULT_TOLERANCE
from .models import DEFAULT_KINDS, REGISTRY
from .turbulence import CLIP_MODES, DEFAULT_CLIP, DEFAULT_WINDOW

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_NONE_WORDS = {"none", "unlimited", "null"}


@dataclass(frozen=True)
class DatasetSource:
    name: str
    sonic: Path
    thermo: Path
    burn_start: float
    burn_end: float


@dataclass(frozen=True)
class SynthOptions:
    n: int = 5000
    noise_sd: float | None = None
    noise_frac: float = 0.05
    kind: str = "nonlinear"
    n_pre: int = 200
    n_post: int = 50


@dataclass(frozen=True)
class RunConfig:
    datasets: tuple = ()
    combine: tuple = ()
    clip: float = DEFAULT_CLIP
    clip_on: str = "wind"
    window: int = DEFAULT_WINDOW
    tolerance: float = DEFAULT_TOLERANCE
    time_origin: str = "relative"
    target: str = "tke_ma"
    split_strategy: str = "random"
    split_fractions: tuple = (0.70, 0.15, 0.15)
    split_seed: int | None = None  # defaults to the run seed
    models: tuple = DEFAULT_KINDS
    grids: dict = field(default_factory=dict)
    out: Path = Path("firetke-out")
    seed: int = 0
    n_jobs: int = 1
    plots: bool = True
    synth: SynthOptions = field(default_factory=SynthOptions)

    def validate(self, need_inputs: bool = True) -> "RunConfig":
        if need_inputs:
            if not self.datasets:
                raise ConfigError("no input dataset configured (need sonic/thermo paths)")
            for ds in self.datasets:
                for p in (ds.sonic, ds.thermo):
                    if not Path(p).is_file():
                        raise FileNotFoundError(f"input file not found: {p} (dataset {ds.name})")
                if not ds.burn_start < ds.burn_end:
                    raise ConfigError(f"dataset {ds.name}: burn_start must be before burn_end")
            names = [d.name for d in self.datasets]
            if len(set(names)) != len(names):
                raise ConfigError(f"duplicate dataset names: {names}")
            for pair in self.combine:
                for n in pair:
                    if n not in names:
                        raise ConfigError(f"combine refers to unknown dataset {n!r}")
        if not self.clip > 0:
            raise ConfigError(f"clip must be > 0, got {self.clip}")
        if self.clip_on not in CLIP_MODES:
            raise ConfigError(f"clip_on must be one of {CLIP_MODES}")
        if self.window < 1:
            raise ConfigError(f"window must be >= 1, got {self.window}")
        if self.tolerance < 0:
            raise ConfigError("tolerance must be >= 0")
        if self.time_origin not in ("relative", "epoch"):
            raise ConfigError("time_origin must be 'relative' or 'epoch'")
        if self.target not in ("tke", "tke_ma"):
            raise ConfigError(f"target must be 'tke' or 'tke_ma', got {self.target!r}")
        for kind in self.models:
            if kind not in REGISTRY:
                raise ConfigError(f"unknown model kind {kind!r}")
        if self.n_jobs < 1:
            raise ConfigError("n_jobs must be >= 1")
        try:
            self.out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory {self.out}: {exc}") from exc
        return self

    @property
    def split(self) -> SplitSpec:
        seed = self.seed if self.split_seed is None else self.split_seed
        return SplitSpec(self.split_fractions, self.split_strategy, seed)

    def with_overrides(self, **kw) -> "RunConfig":
        """Return a copy with every non-None keyword applied (flags beat the file)."""
        kw = {k: v for k, v in kw.items() if v is not None}
        if "split" in kw:
            kw["split_strategy"] = kw.pop("split")
        if "out" in kw:
            kw["out"] = Path(kw["out"])
        return replace(self, **kw).validate_split()

    def validate_split(self) -> "RunConfig":
        try:
            self.split
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self


def _grid_values(values):
    out = []
    for v in values if isinstance(values, list) else [values]:
        if isinstance(v, str) and v.lower() in _NONE_WORDS:
            v = None
        elif isinstance(v, list):
            v = tuple(v)
        out.append(v)
    return out


def from_dict(raw: dict, base_dir=Path(".")) -> RunConfig:
    raw = dict(raw)
    base_dir = Path(base_dir)

    def path(p):
        p = Path(p)
        return p if p.is_absolute() else base_dir / p

    known = {f for f in RunConfig.__dataclass_fields__} | {
        "dataset", "sonic", "thermo", "burn_start", "burn_end", "name", "split"}
    known -= {"split_strategy", "split_fractions", "split_seed"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    entries = list(raw.pop("dataset", []))
    if "sonic" in raw or "thermo" in raw:
        entries.insert(0, {k: raw.pop(k) for k in
                           ("name", "sonic", "thermo", "burn_start", "burn_end") if k in raw})
    datasets = []
    for i, e in enumerate(entries):
        try:
            datasets.append(DatasetSource(str(e.get("name", f"D{i + 1}")), path(e["sonic"]),
                                          path(e["thermo"]), float(e["burn_start"]),
                                          float(e["burn_end"])))
        except KeyError as exc:
            raise ConfigError(f"dataset entry {i + 1} is missing {exc.args[0]!r}") from None

    seed = int(raw.pop("seed", 0))
    sp = dict(raw.pop("split", {}))
    split_kw = {"split_strategy": sp.pop("strategy", "random"),
                "split_fractions": tuple(sp.pop("fractions", (0.7, 0.15, 0.15))),
                "split_seed": sp.pop("seed", None)}
    if sp:
        raise ConfigError(f"unknown [split] keys: {sorted(sp)}")
    grids = {k: {p: _grid_values(v) for p, v in g.items()}
             for k, g in raw.pop("grids", {}).items()}
    synth = SynthOptions(**raw.pop("synth", {}))
    cfg = RunConfig(
        datasets=tuple(datasets),
        combine=tuple(tuple(p) for p in raw.pop("combine", [])),
        grids=grids, seed=seed, synth=synth, **split_kw,
        out=path(raw.pop("out", "firetke-out")),
        models=tuple(raw.pop("models", DEFAULT_KINDS)),
        **raw,
    )
    return cfg.validate_split()


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return from_dict(raw, path.parent)


def to_toml(cfg: RunConfig) -> str:
    """Render the subset of a config that ``load_config`` reads back."""
    lines = [f"seed = {cfg.seed}", f'out = "{cfg.out.as_posix()}"', f'target = "{cfg.target}"',
             f"clip = {cfg.clip!r}", f'clip_on = "{cfg.clip_on}"', f"window = {cfg.window}",
             f"tolerance = {cfg.tolerance!r}", f'time_origin = "{cfg.time_origin}"',
             "models = [" + ", ".join(f'"{m}"' for m in cfg.models) + "]",
             f"n_jobs = {cfg.n_jobs}",
             "combine = [" + ", ".join("[" + ", ".join(f'"{n}"' for n in p) + "]"
                                       for p in cfg.combine) + "]", "",
             "[split]", f'strategy = "{cfg.split_strategy}"',
             "fractions = [" + ", ".join(repr(f) for f in cfg.split_fractions) + "]", ""]
    for ds in cfg.datasets:
        lines += ["[[dataset]]", f'name = "{ds.name}"', f'sonic = "{Path(ds.sonic).as_posix()}"',
                  f'thermo = "{Path(ds.thermo).as_posix()}"',
                  f"burn_start = {ds.burn_start!r}", f"burn_end = {ds.burn_end!r}", ""]
    return "\n".join(lines)
