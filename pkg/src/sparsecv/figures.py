"""Figure rendering for experiment reports.

Each experiment with curve-like output gets a PNG next to its CSV tables.
Everything draws from the same long-format rows the CSV writer consumes,
so figures and tables can never disagree.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from statistics import median

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["render_figures"]


def _by(rows, **match):
    out = [r for r in rows
           if all(r[k] == v for k, v in match.items())]
    return out


def _median_curve(rows, x_key):
    """Collapse seeds: x -> median(value)."""
    groups = defaultdict(list)
    for r in rows:
        groups[r[x_key]].append(r["value"])
    xs = sorted(groups)
    return xs, [median(groups[x]) for x in xs]


def _save(fig, out_dir: Path, name: str) -> Path:
    path = out_dir / name
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _percent_error_vs_n(rows, out_dir):
    methods = sorted({r["method"] for r in rows
                      if r["metric"] == "percent_error"})
    if not methods:
        return []
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for method in methods:
        sub = _by(rows, method=method, metric="percent_error")
        fixed = [r for r in sub if r["D"] != r["N"] // 10]
        growing = [r for r in sub if r["D"] == r["N"] // 10]
        for arm_rows, tag in ((fixed, "fixed D"), (growing, "D=N/10")):
            if not arm_rows:
                continue
            xs, ys = _median_curve(arm_rows, "N")
            ax.loglog(xs, ys, marker="o",
                      label=f"{method} ({tag})")
    ax.set_xlabel("N")
    ax.set_ylabel("percent error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "percent_error_vs_n.png")]


def _sparse_sim(rows, out_dir):
    paths = []
    err = [r for r in rows if r["metric"] == "percent_error"]
    if err:
        methods = sorted({r["method"] for r in err})
        fig, ax = plt.subplots(figsize=(6.0, 4.2))
        data = [[r["value"] for r in _by(err, method=m)] for m in methods]
        ax.boxplot(data, tick_labels=methods)
        ax.set_yscale("log")
        ax.set_ylabel("percent error")
        ax.tick_params(axis="x", rotation=20)
        ax.grid(True, axis="y", alpha=0.3)
        paths.append(_save(fig, out_dir, "percent_error_by_method.png"))
    times = [r for r in rows if r["metric"] == "wall_time_seconds"]
    if times:
        methods = sorted({r["method"] for r in times})
        fig, ax = plt.subplots(figsize=(6.0, 4.2))
        meds = [median([r["value"] for r in _by(times, method=m)])
                for m in methods]
        ax.bar(range(len(methods)), meds)
        ax.set_xticks(range(len(methods)), methods, rotation=20, fontsize=8)
        ax.set_yscale("log")
        ax.set_ylabel("wall time (s)")
        paths.append(_save(fig, out_dir, "wall_time_by_method.png"))
    return paths


def _support_sweep(rows, out_dir):
    sub = [r for r in rows if r["metric"] == "fold_support_max"]
    if not sub:
        return []
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for param in sorted({r["param"] for r in sub}):
        xs, ys = _median_curve(_by(sub, param=param), "N")
        ax.plot(xs, ys, marker="o", label=f"lambda-coef {param}")
    ax.set_xlabel("N")
    ax.set_ylabel("max leave-one-out support size")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "support_size_vs_n.png")]


def _lambda_sweep(rows, out_dir):
    metrics = ["train_loss", "test_loss", "loo", "aloo_ns", "aloo_ij"]
    present = [m for m in metrics
               if any(r["metric"] == m for r in rows)]
    if not present:
        return []
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for metric in present:
        sub = [r for r in rows if r["metric"] == metric]
        groups = defaultdict(list)
        for r in sub:
            groups[float(r["param"])].append(r["value"])
        xs = sorted(groups)
        ax.plot(xs, [median(groups[x]) for x in xs], marker=".",
                label=metric)
    ax.set_xscale("log")
    ax.set_xlabel("lambda")
    ax.set_ylabel("loss")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "lambda_sweep.png")]


def _lissa_frontier(rows, out_dir):
    err = {r["param"]: r["value"] for r in rows
           if r["metric"] == "solve_relative_error" and r["seed"] == -1}
    tim = {r["param"]: r["value"] for r in rows
           if r["metric"] == "wall_time_seconds" and r["seed"] == -1}
    if not err:
        # fall back to per-seed medians
        groups = defaultdict(list)
        for r in rows:
            if r["metric"] == "solve_relative_error":
                groups[r["param"]].append(r["value"])
        err = {k: median(v) for k, v in groups.items()}
        groups = defaultdict(list)
        for r in rows:
            if r["metric"] == "wall_time_seconds":
                groups[r["param"]].append(r["value"])
        tim = {k: median(v) for k, v in groups.items()}
    common = sorted(set(err) & set(tim))
    if not common:
        return []
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.scatter([tim[k] for k in common], [err[k] for k in common])
    for k in common:
        ax.annotate(k, (tim[k], err[k]), fontsize=6)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("wall time (s)")
    ax.set_ylabel("relative solve error")
    ax.grid(True, which="both", alpha=0.3)
    return [_save(fig, out_dir, "lissa_frontier.png")]


_RENDERERS = {
    "scaling": _percent_error_vs_n,
    "sparse-sim": _sparse_sim,
    "support-sweep": _support_sweep,
    "lambda-sweep": _lambda_sweep,
    "lissa-frontier": _lissa_frontier,
    "cv": _sparse_sim,
}


def render_figures(experiment: str, rows, out_dir) -> list:
    renderer = _RENDERERS.get(experiment)
    if renderer is None:
        return []
    return [str(p) for p in renderer(rows, Path(out_dir))]
