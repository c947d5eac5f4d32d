"""Writers for evaluation reports: metric tables, per-model curves and SVG plots.

Everything except ``timings.json`` is a pure function of the report, so
reruns with the same inputs and seeds produce byte-identical files.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from ._io import atomic_write_bytes, atomic_write_text, fmt, write_rows
from .evaluate import PUBLISHED_R2, EvaluationReport
from .models import DISPLAY_NAMES

METRICS = ("r2", "mse", "mae")
SPLITS = ("test", "val")


def _num(x) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.10g}"


def _name(kind):
    return DISPLAY_NAMES.get(kind, kind)


def metric_table(report: EvaluationReport, metric: str):
    header = ["model"] + [f"{ds}_{sp}" for ds in report.datasets for sp in SPLITS]
    rows = []
    for kind in report.kinds:
        row = [_name(kind)]
        for ds in report.datasets:
            r = report.get(ds, kind)
            for sp in SPLITS:
                row.append(_num(r.metrics[sp][metric]) if r.status == "ok" else "failed")
        rows.append(row)
    return header, rows


def published_table(report: EvaluationReport):
    """Published R^2 (%) for datasets named like the field trusses, else None."""
    cols = [(ds, sp) for ds in report.datasets for sp in SPLITS
            if any((ds, sp, k) in PUBLISHED_R2 for k in report.kinds)]
    if not cols:
        return None
    header = ["model"] + [f"{ds}_{sp}" for ds, sp in cols]
    rows = [[_name(k)] + [_num(PUBLISHED_R2.get((ds, sp, k))) for ds, sp in cols]
            for k in report.kinds]
    return header, rows


def summary_text(report: EvaluationReport) -> str:
    lines = ["firetke evaluation summary", "=" * 26, ""]
    for ds, info in report.meta.get("datasets", {}).items():
        lines.append(f"dataset {ds}: {info['rows']} rows (train {info['train']}, "
                     f"val {info['val']}, test {info['test']}), target {info['target']}, "
                     f"{info['split']} split seed {info['split_seed']}")
        if info.get("temporal_leakage"):
            lines.append("  note: random split of a 10 Hz series; neighbouring samples "
                         "fall in different splits, so test scores are optimistic.")
    lines.append("")
    for ds in report.datasets:
        lines.append(f"[{ds}]")
        lines.append(f"  {'model':8s} {'test R2':>9s} {'val R2':>9s} {'test MSE':>11s} "
                     f"{'test MAE':>11s} {'publ. test':>10s}  hyperparameters")
        for kind in report.kinds:
            r = report.get(ds, kind)
            pub = PUBLISHED_R2.get((ds, "test", kind))
            ptxt = f"{pub:.1f}%" if pub is not None else "-"
            if r.status != "ok":
                lines.append(f"  {_name(kind):8s} FAILED: {r.reason}")
                continue
            te, va = r.metrics["test"], r.metrics["val"]
            lines.append(f"  {_name(kind):8s} {te['r2']:9.4f} {va['r2']:9.4f} {te['mse']:11.4g} "
                         f"{te['mae']:11.4g} {ptxt:>10s}  {r.config.label()}")
        lines.append("")
    failed = [r for r in report.results if r.status != "ok"]
    lines.append(f"{len(failed)} failed model run(s)")
    return "\n".join(lines) + "\n"


def write_report(report: EvaluationReport, out_dir, plots: bool = True) -> list:
    """Write all report files under ``out_dir``; returns the written paths."""
    out = Path(out_dir)
    written = []

    def put_rows(rel, header, rows):
        write_rows(out / rel, header, rows)
        written.append(out / rel)

    for metric in METRICS:
        put_rows(f"{metric}.csv", *metric_table(report, metric))
    pub = published_table(report)
    if pub:
        put_rows("r2_published_reference.csv", *pub)

    sel = []
    grid = []
    for r in report.results:
        params = json.dumps(r.config.to_dict()["params"], sort_keys=True) if r.config else ""
        val_r2 = _num(r.metrics["val"]["r2"]) if r.status == "ok" else ""
        sel.append([r.dataset, _name(r.kind), r.status, _csv_quote(params), val_r2,
                    _csv_quote(r.reason)])
        for i, (p, score, err) in enumerate(r.cells):
            grid.append([r.dataset, _name(r.kind), str(i),
                         _csv_quote(json.dumps(p, sort_keys=True)), _num(score),
                         _csv_quote(err or "")])
    put_rows("selected_hyperparameters.csv",
             ["dataset", "model", "status", "params", "val_r2", "reason"], sel)
    put_rows("grid_scores.csv", ["dataset", "model", "cell", "params", "val_r2", "error"], grid)

    for r in report.results:
        if r.status != "ok":
            continue
        stem = f"{r.dataset}_{r.kind}"
        if r.kde is not None:
            put_rows(f"kde/{stem}.csv", ["x", "density"],
                     ([fmt(x), fmt(d)] for x, d in zip(r.kde.grid, r.kde.density)))
        put_rows(f"loss/{stem}.csv", ["epoch_or_stage", "loss"],
                 ([str(i + 1), fmt(v)] for i, v in enumerate(r.loss_trace)))
        t = r.test_t if r.test_t is not None else np.arange(len(r.test_true))
        put_rows(f"predictions/{stem}.csv", ["t", "actual", "predicted"],
                 ([fmt(a), fmt(b), fmt(c)] for a, b, c in zip(t, r.test_true, r.test_pred)))

    atomic_write_text(out / "summary.txt", summary_text(report))
    written.append(out / "summary.txt")
    if plots:
        written.extend(write_plots(report, out / "plots"))
    timings = {f"{r.dataset}/{r.kind}": round(r.runtime, 3) for r in report.results}
    atomic_write_text(out / "timings.json", json.dumps(timings, indent=2) + "\n")
    written.append(out / "timings.json")
    return written


def _csv_quote(s: str) -> str:
    if any(c in s for c in ',"\n'):
        return '"' + s.replace('"', '""') + '"'
    return s


def _svg(fig, path):
    import io

    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    atomic_write_bytes(path, buf.getvalue())


def write_plots(report: EvaluationReport, plot_dir) -> list:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "firetke"
    plot_dir = Path(plot_dir)
    paths = []
    ok = [r for r in report.results if r.status == "ok"]

    for ds in report.datasets:
        rs = [r for r in ok if r.dataset == ds]
        if not rs:
            continue
        # actual vs predicted on the test split, in time order
        fig, axes = plt.subplots(len(rs), 1, figsize=(8, 2.2 * len(rs)), squeeze=False)
        for ax, r in zip(axes[:, 0], rs):
            t = r.test_t if r.test_t is not None else np.arange(len(r.test_true))
            order = np.argsort(t, kind="stable")
            ax.plot(t[order], r.test_true[order], lw=0.8, color="tab:blue", label="actual")
            ax.plot(t[order], r.test_pred[order], lw=0.8, color="tab:orange", label="predicted")
            ax.set_ylabel("TKE")
            ax.set_title(f"{_name(r.kind)} ({ds})", fontsize=9)
        axes[0, 0].legend(fontsize=8)
        axes[-1, 0].set_xlabel("t (s)")
        fig.tight_layout()
        paths.append(plot_dir / f"actual_vs_predicted_{ds}.svg")
        _svg(fig, paths[-1])
        plt.close(fig)

        fig, ax = plt.subplots(figsize=(6, 4))
        for r in rs:
            if r.kde is not None:
                ax.plot(r.kde.grid, r.kde.density, label=_name(r.kind))
        ax.set_xlabel("residual (m$^2$/s$^2$)")
        ax.set_ylabel("density")
        ax.set_title(f"Residual KDE ({ds})")
        ax.legend(fontsize=8)
        fig.tight_layout()
        paths.append(plot_dir / f"residual_kde_{ds}.svg")
        _svg(fig, paths[-1])
        plt.close(fig)

        traced = [r for r in rs if len(r.loss_trace)]
        if traced:
            fig, ax = plt.subplots(figsize=(6, 4))
            for r in traced:
                ax.plot(np.arange(1, len(r.loss_trace) + 1), r.loss_trace, label=_name(r.kind))
            ax.set_yscale("log")
            ax.set_xlabel("epoch / stage")
            ax.set_ylabel("training loss")
            ax.set_title(f"Error evolution ({ds})")
            ax.legend(fontsize=8)
            fig.tight_layout()
            paths.append(plot_dir / f"loss_{ds}.svg")
            _svg(fig, paths[-1])
            plt.close(fig)

    for metric in ("mse", "mae", "r2"):
        fig, ax = plt.subplots(figsize=(7, 4))
        kinds = report.kinds
        width = 0.8 / max(1, len(report.datasets))
        for j, ds in enumerate(report.datasets):
            vals = []
            for k in kinds:
                r = report.get(ds, k)
                vals.append(r.metrics["test"][metric] if r.status == "ok" else np.nan)
            ax.bar(np.arange(len(kinds)) + j * width, vals, width, label=ds)
        ax.set_xticks(np.arange(len(kinds)) + 0.4 - width / 2)
        ax.set_xticklabels([_name(k) for k in kinds])
        ax.set_ylabel(f"test {metric.upper()}")
        ax.legend(fontsize=8)
        fig.tight_layout()
        paths.append(plot_dir / f"metric_{metric}.svg")
        _svg(fig, paths[-1])
        plt.close(fig)
    return paths
