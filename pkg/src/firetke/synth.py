"""Seeded synthetic datasets with controlled linear vs. nonlinear dependence.

Features imitate a thermocouple truss: eight temperature-like columns
driven by three shared latent factors plus small independent jitter, so
they are strongly inter-correlated like real stacked sensors. The
latent factors and jitter are symmetric about zero, which is what makes
the nonlinear target uncorrelated with every feature:

``nonlinear``  y = offset + sum_j coef_j * (x_j - center_j)^2 + noise
``linear``     y = offset + sum_j coef_j * (x_j - center_j) + noise

For the nonlinear kind every feature/target covariance is a sum of
third central moments of a symmetric distribution, hence zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset
from .ingest import SonicSeries, ThermoSeries, write_sonic_csv, write_thermo_csv

KINDS = ("linear", "nonlinear")
KIND_ALIASES = {"nonlinear-weak-pearson": "nonlinear"}

CENTER = np.array([26.0, 25.0, 24.0, 23.0, 22.0, 21.5, 21.0, 23.5])
# rows: T1..T7 (rising mount height), sonic_T; columns: latent factors
MIXING = np.array([
    [3.0, 1.5, 0.2],
    [2.8, 1.1, 0.3],
    [2.6, 0.7, 0.4],
    [2.4, 0.2, 0.5],
    [2.2, -0.3, 0.6],
    [2.0, -0.8, 0.7],
    [1.8, -1.3, 0.8],
    [1.0, 0.3, 2.0],
])
JITTER_SD = 0.05
NONLINEAR_COEF = np.full(8, 0.02)
LINEAR_COEF = np.array([1.0, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1])
OFFSET = {"nonlinear": 0.5, "linear": 12.0}

BASELINE_WIND = (1.5, -0.5, 0.2)


@dataclass(frozen=True)
class SynthSpec:
    n: int = 1000
    noise_sd: float = 0.0
    seed: int = 0
    kind: str = "nonlinear"

    def __post_init__(self):
        kind = KIND_ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS + tuple(KIND_ALIASES)}, got {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if int(self.n) != self.n or self.n < 10:
            raise ValueError(f"n must be an integer >= 10, got {self.n}")
        if not self.noise_sd >= 0:
            raise ValueError(f"noise_sd must be >= 0, got {self.noise_sd}")


def _streams(seed):
    feat_ss, noise_ss, wind_ss = np.random.SeedSequence(seed).spawn(3)
    return (np.random.default_rng(feat_ss), np.random.default_rng(noise_ss),
            np.random.default_rng(wind_ss))


def draw_features(n, rng) -> np.ndarray:
    z = rng.standard_normal((n, MIXING.shape[1]))
    jitter = JITTER_SD * rng.standard_normal((n, len(CENTER)))
    return CENTER + z @ MIXING.T + jitter


def target_function(X, kind="nonlinear") -> np.ndarray:
    """Noise-free target for generated features."""
    kind = KIND_ALIASES.get(kind, kind)
    D = np.asarray(X, dtype=float) - CENTER
    if kind == "nonlinear":
        return OFFSET[kind] + (D ** 2) @ NONLINEAR_COEF
    return OFFSET[kind] + D @ LINEAR_COEF


def generate(spec: SynthSpec, name: str = "synth") -> Dataset:
    feat_rng, noise_rng, _ = _streams(spec.seed)
    X = draw_features(spec.n, feat_rng)
    g = target_function(X, spec.kind)
    y = g + spec.noise_sd * noise_rng.standard_normal(spec.n)
    meta = {"generator": "firetke.synth", "kind": spec.kind, "seed": spec.seed,
            "noise_sd": spec.noise_sd, "offset": OFFSET[spec.kind],
            "center": CENTER.tolist(),
            "coef": (NONLINEAR_COEF if spec.kind == "nonlinear" else LINEAR_COEF).tolist()}
    t = np.arange(spec.n) / 10.0
    return Dataset(X, y, t, name=name, target_name="tke", meta=meta)


def relative_noise_sd(spec: SynthSpec, fraction: float) -> float:
    """Noise sd equal to ``fraction`` of the noise-free target's sd."""
    feat_rng, _, _ = _streams(spec.seed)
    g = target_function(draw_features(spec.n, feat_rng), spec.kind)
    return float(fraction * np.std(g))


def write_fixture(spec: SynthSpec, out_dir, n_pre: int = 200, n_post: int = 50) -> dict:
    """Write ``sonic.csv`` and ``thermo.csv`` whose burn-period TKE equals the target.

    Pre- and post-burn wind is the constant baseline. During the burn the
    wind perturbation has length ``sqrt(2*y)`` along a random direction,
    so the raw TKE of every burn row reproduces its target (targets below
    zero are clipped to zero, since TKE cannot be negative). Returns the
    paths, the burn window and the number of clipped rows.
    """
    ds = generate(spec)
    feat_rng, _, wind_rng = _streams(spec.seed)
    draw_features(spec.n, feat_rng)  # advance past the burn rows
    pre = draw_features(n_pre, feat_rng)
    post = draw_features(n_post, feat_rng)
    features = np.vstack([pre, ds.X, post])
    total = len(features)
    t = np.arange(total) / 10.0

    y = ds.y
    clipped = int(np.count_nonzero(y < 0))
    mag = np.sqrt(2.0 * np.maximum(y, 0.0))
    direction = wind_rng.standard_normal((spec.n, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    wind = np.tile(np.array(BASELINE_WIND), (total, 1))
    wind[n_pre:n_pre + spec.n] += mag[:, None] * direction

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sonic = SonicSeries(t, wind[:, 0], wind[:, 1], wind[:, 2], features[:, 7])
    thermo = ThermoSeries(t, features[:, :7])
    write_sonic_csv(out / "sonic.csv", sonic)
    write_thermo_csv(out / "thermo.csv", thermo)
    return {"sonic": out / "sonic.csv", "thermo": out / "thermo.csv",
            "burn_start": float(t[n_pre]), "burn_end": float(t[n_pre + spec.n - 1]),
            "clipped": clipped}
