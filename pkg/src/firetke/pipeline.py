"""End-to-end glue: sensor files -> aligned frames -> TKE -> model datasets."""
from __future__ import annotations

import logging
from dataclasses import dataclass

from . import ingest, turbulence
from .config import DatasetSource, RunConfig
from .data import Dataset, build_dataset
from .errors import BaselineError
from .evaluate import combine_datasets
from .ingest import BurnPhase

logger = logging.getLogger(__name__)


@dataclass
class Processed:
    source: DatasetSource
    frames: ingest.Frames
    means: turbulence.BaselineMeans
    series: turbulence.TkeSeries
    summary: dict


def process_source(src: DatasetSource, cfg: RunConfig) -> Processed:
    sonic = ingest.parse_sonic_csv(src.sonic)
    thermo = ingest.parse_thermo_csv(src.thermo)
    if cfg.time_origin == "epoch":
        sonic, thermo = ingest.to_relative(sonic, thermo)
    frames = ingest.align(sonic, thermo, cfg.tolerance)
    if len(frames) == 0:
        raise ValueError(f"dataset {src.name}: no sonic/thermo samples could be paired "
                         f"within {cfg.tolerance} s")
    frames = ingest.segment_phases(frames, src.burn_start, src.burn_end)
    pre = frames.in_phase(BurnPhase.PRE)
    try:
        means = turbulence.baseline_means(pre, cfg.clip, cfg.clip_on)
    except BaselineError as exc:
        raise BaselineError(f"dataset {src.name}: {exc}") from exc
    series = turbulence.tke_series(frames, means, cfg.window)
    counts = {p.label: int((frames.phase == int(p)).sum()) for p in BurnPhase}
    summary = {
        "dataset": src.name,
        "sonic_file": str(src.sonic), "thermo_file": str(src.thermo),
        "sonic_rows": len(sonic), "sonic_rejected": sonic.rejected,
        "thermo_rows": len(thermo), "thermo_rejected": thermo.rejected,
        "aligned_frames": len(frames), "dropped_sonic": frames.dropped_sonic,
        "dropped_thermo": frames.dropped_thermo, "phase_counts": counts,
        "burn_window": [src.burn_start, src.burn_end],
        "baseline": {"u_bar": means.u_bar, "v_bar": means.v_bar, "w_bar": means.w_bar,
                     "n_used": means.n_used, "n_truncated": means.n_truncated,
                     "truncated_per_component": means.truncated_per_component,
                     "clip": cfg.clip, "clip_on": cfg.clip_on},
        "window": cfg.window,
    }
    return Processed(src, frames, means, series, summary)


def datasets_from_config(cfg: RunConfig, processed=None) -> list[Dataset]:
    """One dataset per source (burn rows, defined target) plus configured combinations."""
    processed = processed or [process_source(s, cfg) for s in cfg.datasets]
    out = []
    for p in processed:
        ds = build_dataset(p.frames, p.series, cfg.target, BurnPhase.BURN, name=p.source.name)
        if len(ds) < 2:
            raise ValueError(f"dataset {p.source.name}: only {len(ds)} burn-period rows")
        out.append(ds)
    by_name = {d.name: d for d in out}
    for pair in cfg.combine:
        combined = by_name[pair[0]]
        for other in pair[1:]:
            combined = combine_datasets(combined, by_name[other])
        out.append(combined)
    return out
