"""Sensor CSV parsing, stream alignment and burn-phase segmentation.

Both sensor streams are held column-wise in numpy arrays. Indexing a
stream returns a single sample tuple, so the containers behave as
read-only sequences of samples.
"""
from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ._io import fmt, write_rows
from .errors import AlignmentError, ParseError

logger = logging.getLogger(__name__)

SONIC_HEADER = ("t", "u", "v", "w", "sonic_T")
THERMO_HEADER = ("t", "T1", "T2", "T3", "T4", "T5", "T6", "T7")
FEATURE_NAMES = ("T1", "T2", "T3", "T4", "T5", "T6", "T7", "sonic_T")
ALIGNED_HEADER = ("t",) + FEATURE_NAMES + ("u", "v", "w", "phase")

MAX_REJECT_FRACTION = 0.5
DEFAULT_TOLERANCE = 0.05
# absorbs decimal representation error of 0.1 s ticks when comparing gaps
_GAP_SLACK = 1e-9


class BurnPhase(enum.IntEnum):
    PRE = 0
    BURN = 1
    POST = 2

    @property
    def label(self) -> str:
        return ("pre", "burn", "post")[self.value]

    @classmethod
    def from_label(cls, label: str) -> "BurnPhase":
        try:
            return cls(("pre", "burn", "post").index(label.strip()))
        except ValueError:
            raise ValueError(f"unknown phase label {label!r}") from None


class SonicSample(NamedTuple):
    t: float
    u: float
    v: float
    w: float
    sonic_T: float


class ThermoSample(NamedTuple):
    t: float
    temps: tuple


class AlignedFrame(NamedTuple):
    t: float
    features: tuple
    wind: tuple
    phase: BurnPhase | None


@dataclass(frozen=True)
class SonicSeries:
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    sonic_T: np.ndarray
    rejected: int = 0
    rejected_lines: tuple = ()

    def __len__(self):
        return len(self.t)

    def __getitem__(self, i) -> SonicSample:
        return SonicSample(float(self.t[i]), float(self.u[i]), float(self.v[i]),
                           float(self.w[i]), float(self.sonic_T[i]))

    @classmethod
    def from_samples(cls, samples) -> "SonicSeries":
        arr = np.array([tuple(s) for s in samples], dtype=float).reshape(-1, 5)
        return cls(*(arr[:, j].copy() for j in range(5)))

    def shifted(self, dt: float) -> "SonicSeries":
        return SonicSeries(self.t + dt, self.u, self.v, self.w, self.sonic_T,
                           self.rejected, self.rejected_lines)


@dataclass(frozen=True)
class ThermoSeries:
    t: np.ndarray
    temps: np.ndarray  # (n, 7), ordered by mount height
    rejected: int = 0
    rejected_lines: tuple = ()

    def __len__(self):
        return len(self.t)

    def __getitem__(self, i) -> ThermoSample:
        return ThermoSample(float(self.t[i]), tuple(float(x) for x in self.temps[i]))

    @classmethod
    def from_samples(cls, samples) -> "ThermoSeries":
        samples = list(samples)
        t = np.array([s.t for s in samples], dtype=float)
        temps = np.array([s.temps for s in samples], dtype=float).reshape(-1, 7)
        return cls(t, temps)

    def shifted(self, dt: float) -> "ThermoSeries":
        return ThermoSeries(self.t + dt, self.temps, self.rejected, self.rejected_lines)


@dataclass(frozen=True)
class Frames:
    """Aligned 10 Hz frames: features are T1..T7, sonic_T; wind is u, v, w."""

    t: np.ndarray
    features: np.ndarray  # (n, 8)
    wind: np.ndarray  # (n, 3)
    phase: np.ndarray | None = None  # int8 BurnPhase codes
    dropped_sonic: int = 0
    dropped_thermo: int = 0

    def __len__(self):
        return len(self.t)

    def __getitem__(self, i) -> AlignedFrame:
        phase = None if self.phase is None else BurnPhase(int(self.phase[i]))
        return AlignedFrame(float(self.t[i]), tuple(self.features[i].tolist()),
                            tuple(self.wind[i].tolist()), phase)

    def select(self, mask) -> "Frames":
        phase = None if self.phase is None else self.phase[mask]
        return Frames(self.t[mask], self.features[mask], self.wind[mask], phase)

    def in_phase(self, phase: BurnPhase) -> "Frames":
        if self.phase is None:
            raise ValueError("frames have not been segmented")
        return self.select(self.phase == int(phase))

    @property
    def sonic(self) -> SonicSeries:
        return SonicSeries(self.t.copy(), self.wind[:, 0].copy(), self.wind[:, 1].copy(),
                           self.wind[:, 2].copy(), self.features[:, 7].copy())

    @property
    def thermo(self) -> ThermoSeries:
        return ThermoSeries(self.t.copy(), self.features[:, :7].copy())


def _read_table(path, header, finite_check):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"sensor file not found: {path}")
    ncol = len(header)
    rows = []
    bad = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            head = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file, expected header {','.join(header)}") from None
        head = tuple(h.strip().lstrip("﻿") for h in head)
        if head != header:
            raise ParseError(
                f"{path}:1: malformed header {','.join(head)!r}, expected {','.join(header)!r}")
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != ncol:
                logger.warning("%s:%d: expected %d fields, got %d; row rejected",
                               path, lineno, ncol, len(row))
                bad.append(lineno)
                continue
            try:
                vals = [float(c) for c in row]
            except ValueError:
                logger.warning("%s:%d: non-numeric field; row rejected", path, lineno)
                bad.append(lineno)
                continue
            if not finite_check(vals):
                logger.warning("%s:%d: non-finite or negative value; row rejected", path, lineno)
                bad.append(lineno)
                continue
            rows.append(vals)
    total = len(rows) + len(bad)
    if total and len(bad) > MAX_REJECT_FRACTION * total:
        raise ParseError(
            f"{path}: {len(bad)} of {total} data rows rejected "
            f"(more than {MAX_REJECT_FRACTION:.0%}); first bad line {bad[0]}")
    arr = np.array(rows, dtype=float).reshape(-1, ncol)
    return arr, len(bad), tuple(bad)


def _valid(vals):
    return all(math.isfinite(v) for v in vals) and vals[0] >= 0.0


def parse_sonic_csv(path) -> SonicSeries:
    """Read a ``t,u,v,w,sonic_T`` file.

    Rows that are short, non-numeric or non-finite are skipped and
    counted in ``rejected``; more than half the rows rejected raises
    :class:`ParseError`.
    """
    arr, nbad, lines = _read_table(path, SONIC_HEADER, _valid)
    return SonicSeries(*(arr[:, j].copy() for j in range(5)), rejected=nbad,
                       rejected_lines=lines)


def parse_thermo_csv(path) -> ThermoSeries:
    arr, nbad, lines = _read_table(path, THERMO_HEADER, _valid)
    return ThermoSeries(arr[:, 0].copy(), arr[:, 1:].copy(), rejected=nbad,
                        rejected_lines=lines)


def write_sonic_csv(path, sonic: SonicSeries) -> None:
    rows = ((fmt(a), fmt(b), fmt(c), fmt(d), fmt(e))
            for a, b, c, d, e in zip(sonic.t, sonic.u, sonic.v, sonic.w, sonic.sonic_T))
    write_rows(path, SONIC_HEADER, rows)


def write_thermo_csv(path, thermo: ThermoSeries) -> None:
    rows = ([fmt(t)] + [fmt(x) for x in temps] for t, temps in zip(thermo.t, thermo.temps))
    write_rows(path, THERMO_HEADER, rows)


def write_aligned_csv(path, frames: Frames) -> None:
    def rows():
        for i in range(len(frames)):
            phase = "" if frames.phase is None else BurnPhase(int(frames.phase[i])).label
            yield ([fmt(frames.t[i])] + [fmt(x) for x in frames.features[i]]
                   + [fmt(x) for x in frames.wind[i]] + [phase])
    write_rows(path, ALIGNED_HEADER, rows())


def read_aligned_csv(path) -> Frames:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        head = tuple(h.strip() for h in next(reader))
        if head != ALIGNED_HEADER:
            raise ParseError(f"{path}:1: malformed aligned header")
        data = [r for r in reader if r]
    num = np.array([[float(c) for c in r[:-1]] for r in data], dtype=float).reshape(-1, 12)
    labels = [r[-1] for r in data]
    phase = None
    if labels and all(labels):
        phase = np.array([BurnPhase.from_label(x) for x in labels], dtype=np.int8)
    return Frames(num[:, 0].copy(), num[:, 1:9].copy(), num[:, 9:12].copy(), phase)


def to_relative(sonic: SonicSeries, thermo: ThermoSeries):
    """Shift both streams so the earliest timestamp of either is zero.

    Used when files carry seconds-since-epoch; a shared origin keeps the
    two clocks comparable.
    """
    starts = [s.t[0] for s in (sonic, thermo) if len(s)]
    if not starts:
        return sonic, thermo
    origin = min(starts)
    return sonic.shifted(-origin), thermo.shifted(-origin)


def _check_sorted(t, name):
    if len(t) > 1 and np.any(np.diff(t) < 0):
        i = int(np.argmax(np.diff(t) < 0))
        raise AlignmentError(f"{name} timestamps are not sorted (index {i + 1})")


def align(sonic: SonicSeries, thermo: ThermoSeries,
          tolerance: float = DEFAULT_TOLERANCE) -> Frames:
    """Pair every sonic sample with the nearest thermocouple sample.

    A pair is kept when the gap is at most ``tolerance`` seconds. Each
    thermocouple sample is used at most once and repeated sonic
    timestamps keep only their first occurrence. Frames carry the sonic
    timestamp; phase is left unset.
    """
    if tolerance < 0 or not math.isfinite(tolerance):
        raise AlignmentError(f"tolerance must be a finite value >= 0, got {tolerance}")
    _check_sorted(sonic.t, "sonic")
    _check_sorted(thermo.t, "thermo")
    ns, nt = len(sonic), len(thermo)
    if ns == 0 or nt == 0:
        logger.warning("alignment input is empty (sonic=%d, thermo=%d)", ns, nt)
        return Frames(np.empty(0), np.empty((0, 8)), np.empty((0, 3)),
                      dropped_sonic=ns, dropped_thermo=nt)

    pos = np.searchsorted(thermo.t, sonic.t)
    left = np.clip(pos - 1, 0, nt - 1)
    right = np.clip(pos, 0, nt - 1)
    gap_l = np.abs(sonic.t - thermo.t[left])
    gap_r = np.abs(thermo.t[right] - sonic.t)
    nearest = np.where(gap_r < gap_l, right, left)
    gap = np.minimum(gap_l, gap_r)
    ok = gap <= tolerance + _GAP_SLACK

    keep = np.zeros(ns, dtype=bool)
    used = np.zeros(nt, dtype=bool)
    last_t = -np.inf
    for i in np.flatnonzero(ok):
        j = nearest[i]
        if used[j] or sonic.t[i] == last_t:
            continue
        used[j] = True
        keep[i] = True
        last_t = sonic.t[i]

    si = np.flatnonzero(keep)
    ti = nearest[si]
    features = np.column_stack([thermo.temps[ti], sonic.sonic_T[si]]).reshape(-1, 8)
    wind = np.column_stack([sonic.u[si], sonic.v[si], sonic.w[si]]).reshape(-1, 3)
    frames = Frames(sonic.t[si].copy(), features, wind,
                    dropped_sonic=int(ns - len(si)), dropped_thermo=int(nt - len(si)))
    if len(frames) == 0:
        logger.warning("no sonic/thermo pairs within %.3g s; aligned output is empty", tolerance)
    return frames


def segment_phases(frames: Frames, burn_start: float, burn_end: float) -> Frames:
    """Label frames pre-burn (t < start), burn (start <= t <= end) or post-burn."""
    if not burn_start < burn_end:
        raise ValueError(f"burn_start ({burn_start}) must be before burn_end ({burn_end})")
    t = frames.t
    phase = np.full(len(t), BurnPhase.BURN, dtype=np.int8)
    phase[t < burn_start] = BurnPhase.PRE
    phase[t > burn_end] = BurnPhase.POST
    return Frames(t, frames.features, frames.wind, phase,
                  frames.dropped_sonic, frames.dropped_thermo)
