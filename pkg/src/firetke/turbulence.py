"""Wind perturbations and turbulence kinetic energy."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._io import fmt, write_rows
from .errors import BaselineError

DEFAULT_CLIP = 50.0
DEFAULT_WINDOW = 10
CLIP_MODES = ("wind", "sonic_T", "both")


@dataclass(frozen=True)
class BaselineMeans:
    u_bar: float
    v_bar: float
    w_bar: float
    n_used: int
    n_truncated: int
    truncated_per_component: dict = field(default_factory=dict)

    def as_array(self) -> np.ndarray:
        return np.array([self.u_bar, self.v_bar, self.w_bar])


@dataclass(frozen=True)
class TkeSeries:
    t: np.ndarray
    tke: np.ndarray
    tke_ma: np.ndarray  # NaN where undefined (leading window - 1 points)
    window: int = DEFAULT_WINDOW

    def __len__(self):
        return len(self.t)

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.tke_ma)

    def target(self, which: str = "tke_ma") -> np.ndarray:
        if which == "tke_ma":
            return self.tke_ma
        if which == "tke":
            return self.tke
        raise ValueError(f"unknown target {which!r}; expected 'tke' or 'tke_ma'")

    def to_csv(self, path) -> None:
        rows = ((fmt(t), fmt(k), "" if math.isnan(m) else fmt(m))
                for t, k, m in zip(self.t, self.tke, self.tke_ma))
        write_rows(path, ("t", "tke", "tke_ma"), rows)


def _wind_of(frames):
    wind = getattr(frames, "wind", frames)
    return np.asarray(wind, dtype=float).reshape(-1, 3)


def baseline_means(preburn, clip: float = DEFAULT_CLIP, clip_on: str = "wind") -> BaselineMeans:
    """Mean wind over the pre-burn period with out-of-band samples excluded.

    With ``clip_on="wind"`` each component drops its own samples outside
    ``[-clip, clip]``. ``"sonic_T"`` drops whole samples whose sonic
    temperature is outside the band, and ``"both"`` applies both rules.
    ``n_used`` counts samples that entered every component mean.
    """
    if not clip > 0:
        raise BaselineError(f"clip must be > 0, got {clip}")
    if clip_on not in CLIP_MODES:
        raise BaselineError(f"clip_on must be one of {CLIP_MODES}, got {clip_on!r}")
    wind = _wind_of(preburn)
    n = len(wind)
    if n == 0:
        raise BaselineError("no pre-burn samples to compute baseline means from")

    keep = np.ones((n, 3), dtype=bool)
    if clip_on in ("wind", "both"):
        keep &= np.abs(wind) <= clip
    if clip_on in ("sonic_T", "both"):
        if not hasattr(preburn, "features"):
            raise BaselineError("sonic_T truncation needs frames with a sonic_T column")
        sonic_T = np.asarray(preburn.features)[:, 7]
        keep &= (np.abs(sonic_T) <= clip)[:, None]

    means = []
    per = {}
    for j, name in enumerate("uvw"):
        col = wind[keep[:, j], j]
        per[name] = int(n - len(col))
        if len(col) == 0:
            raise BaselineError(
                f"all {n} pre-burn {name} samples lie outside [-{clip}, {clip}]")
        means.append(float(np.mean(col)))
    n_used = int(np.count_nonzero(keep.all(axis=1)))
    return BaselineMeans(*means, n_used=n_used, n_truncated=n - n_used,
                         truncated_per_component=per)


def perturb(frames, means: BaselineMeans) -> np.ndarray:
    """Per-frame (u', v', w') as an (n, 3) array."""
    bar = means.as_array()
    if not np.all(np.isfinite(bar)):
        raise BaselineError("baseline means must be finite")
    return _wind_of(frames) - bar


def tke(up, vp, wp):
    return 0.5 * (np.square(up) + np.square(vp) + np.square(wp))


def moving_average(series, window: int = DEFAULT_WINDOW) -> np.ndarray:
    """Trailing mean over ``window`` points; the first window-1 entries are NaN."""
    x = np.asarray(series, dtype=float)
    window = int(window)
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if len(x) < window:
        raise ValueError(f"series of length {len(x)} is shorter than window {window}")
    out = np.full(len(x), np.nan)
    # direct windowed sum; a running cumsum would accumulate rounding drift
    view = np.lib.stride_tricks.sliding_window_view(x, window)
    # clipping removes summation round-off that can leave the window's range
    out[window - 1:] = np.clip(view.mean(axis=1), view.min(axis=1), view.max(axis=1))
    return out


def tke_series(frames, means: BaselineMeans, window: int = DEFAULT_WINDOW) -> TkeSeries:
    p = perturb(frames, means)
    k = tke(p[:, 0], p[:, 1], p[:, 2])
    return TkeSeries(np.asarray(frames.t, dtype=float).copy(), k,
                     moving_average(k, window), window)
