"""``firetke`` command line: tke, correlate, evaluate, synth.

Exit codes: 0 all outputs written; 1 unexpected failure; 2 bad input or
configuration (nothing written); 3 report written but at least one model
failed. Failures print a one-line JSON summary on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import report as report_mod
from . import stats, synth
from ._io import atomic_write_text
from .config import DatasetSource, RunConfig, load_config, to_toml
from .errors import ConfigError, FireTkeError, ParseError
from .evaluate import compare_models
from .ingest import write_aligned_csv
from .pipeline import datasets_from_config, process_source

logger = logging.getLogger("firetke")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_PARTIAL = 0, 1, 2, 3


def _load(args, need_inputs=True) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    cfg = cfg.with_overrides(seed=args.seed, out=args.out, target=args.target, clip=args.clip,
                             window=args.window, split=args.split,
                             n_jobs=getattr(args, "jobs", None))
    return cfg.validate(need_inputs=need_inputs)


def _json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_tke(cfg: RunConfig, export_aligned=False) -> list:
    processed = [process_source(s, cfg) for s in cfg.datasets]
    written = []
    for p in processed:
        name = p.source.name
        p.series.to_csv(cfg.out / f"tke_{name}.csv")
        _json(cfg.out / f"tke_summary_{name}.json", p.summary)
        written += [cfg.out / f"tke_{name}.csv", cfg.out / f"tke_summary_{name}.json"]
        if export_aligned:
            write_aligned_csv(cfg.out / f"aligned_{name}.csv", p.frames)
            written.append(cfg.out / f"aligned_{name}.csv")
    return written


def cmd_correlate(cfg: RunConfig) -> list:
    datasets = datasets_from_config(cfg)
    mats = []
    for ds in datasets:
        cols, labels = ds.columns()
        mats.append((ds.name, stats.correlation_matrix(cols, labels)))
    written = []
    for name, cm in mats:
        pp, sp = cfg.out / f"pearson_{name}.csv", cfg.out / f"spearman_{name}.csv"
        cm.to_csv(pp, sp)
        written += [pp, sp]
    return written


def cmd_evaluate(cfg: RunConfig):
    datasets = datasets_from_config(cfg)
    rep = None
    for ds in datasets:
        part = compare_models(ds, cfg.split, cfg.models, cfg.grids, cfg.seed, cfg.n_jobs)
        rep = part if rep is None else rep.merge(part)
    written = report_mod.write_report(rep, cfg.out, plots=cfg.plots)
    return rep, written


def cmd_synth(cfg: RunConfig, n=None, noise_sd=None, noise_frac=None, kind=None) -> list:
    opts = cfg.synth
    n = opts.n if n is None else n
    kind = opts.kind if kind is None else kind
    if noise_sd is None:
        noise_sd = opts.noise_sd
    if noise_sd is None:
        frac = opts.noise_frac if noise_frac is None else noise_frac
        noise_sd = synth.relative_noise_sd(synth.SynthSpec(n, 0.0, cfg.seed, kind), frac)
    spec = synth.SynthSpec(n, noise_sd, cfg.seed, kind)
    info = synth.write_fixture(spec, cfg.out, opts.n_pre, opts.n_post)
    run = RunConfig(
        datasets=(DatasetSource("synth", Path("sonic.csv"), Path("thermo.csv"),
                                info["burn_start"], info["burn_end"]),),
        target="tke", seed=cfg.seed, out=Path("report"))
    atomic_write_text(cfg.out / "run.toml", to_toml(run) + "\n")
    meta = {"n": spec.n, "noise_sd": spec.noise_sd, "seed": spec.seed, "kind": spec.kind,
            "burn_start": info["burn_start"], "burn_end": info["burn_end"],
            "clipped_targets": info["clipped"], "generator": synth.__name__}
    _json(cfg.out / "synth_meta.json", meta)
    return [info["sonic"], info["thermo"], cfg.out / "run.toml", cfg.out / "synth_meta.json"]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--target", choices=("tke", "tke_ma"))
    common.add_argument("--clip", type=float, help="pre-burn truncation band half-width")
    common.add_argument("--window", type=int, help="moving-average window (samples)")
    common.add_argument("--split", choices=("random", "chrono"))
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = argparse.ArgumentParser(prog="firetke", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    t = sub.add_parser("tke", parents=[common], help="compute TKE and TKE moving average")
    t.add_argument("--export-aligned", action="store_true",
                   help="also write the aligned, phase-labelled frames")
    sub.add_parser("correlate", parents=[common], help="Pearson/Spearman matrices")
    e = sub.add_parser("evaluate", parents=[common], help="train and compare models")
    e.add_argument("--jobs", type=int, help="parallel workers (results do not depend on it)")
    s = sub.add_parser("synth", parents=[common], help="write a synthetic sensor fixture")
    s.add_argument("--n", type=int, help="burn-period rows")
    s.add_argument("--noise-sd", type=float)
    s.add_argument("--noise-frac", type=float, help="noise sd as a fraction of target sd")
    s.add_argument("--kind", choices=("nonlinear", "nonlinear-weak-pearson", "linear"))
    return p


def _fail(code, exc):
    print(json.dumps({"status": "error", "exit_code": code, "error_type": type(exc).__name__,
                      "message": str(exc)}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            cfg = _load(args, need_inputs=False)
            written = cmd_synth(cfg, args.n, args.noise_sd, args.noise_frac, args.kind)
        else:
            cfg = _load(args)
            if args.command == "tke":
                written = cmd_tke(cfg, args.export_aligned)
            elif args.command == "correlate":
                written = cmd_correlate(cfg)
            else:
                rep, written = cmd_evaluate(cfg)
                failed = [r for r in rep.results if r.status != "ok"]
                if failed:
                    print(json.dumps({"status": "partial", "exit_code": EXIT_PARTIAL,
                                      "failed": [{"dataset": r.dataset, "model": r.kind,
                                                  "reason": r.reason} for r in failed]}),
                          file=sys.stderr)
                    return EXIT_PARTIAL
    except (FileNotFoundError, ConfigError, ParseError) as exc:
        return _fail(EXIT_INPUT, exc)
    except (FireTkeError, ValueError, OSError) as exc:
        return _fail(EXIT_FAIL, exc)
    for path in written:
        logger.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
