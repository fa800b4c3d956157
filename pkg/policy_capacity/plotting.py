"""
SVG renderings of emitted CSV/JSON data

matplotlib is an optional extra (`pip install policy-capacity[plot]`); every
function here reads plain data, so the figures can always be rebuilt from a
run directory.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

import numpy as np
from loguru import logger

from policy_capacity.errors import PolicyCapacityError
from policy_capacity.persistence import read_rows_csv
from policy_capacity.stats import MetricTable, pearson

# fixed metadata so reruns write identical files
SVG_METADATA = {"Date": None, "Creator": None}


def _pyplot() -> Any:
    try:
        import matplotlib
    except ImportError:
        raise PolicyCapacityError(
            "plotting needs matplotlib; install with: pip install 'policy-capacity[plot]'"
        ) from None
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "policy-capacity"
    import matplotlib.pyplot as plt

    return plt


def _save(fig: Any, path: str | Path) -> Path:
    plt = _pyplot()
    path = Path(path)
    if path.suffix != ".svg":
        path = path.with_name(path.name + ".svg")
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    logger.info("Wrote {}", path)
    return path


def plot_es_traces(trace_paths: list[str | Path], out: str | Path) -> Path:
    """Mean return and POIC against epoch, one line per trace file"""
    if not trace_paths:
        raise PolicyCapacityError("no trace files to plot")
    plt = _pyplot()
    fig, (ax_ret, ax_poic) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    for path in trace_paths:
        rows = read_rows_csv(path)
        epochs = [int(r["epoch"]) for r in rows]
        label = Path(path).stem
        ax_ret.plot(epochs, [float(r["mean_return"]) for r in rows], label=label)
        ax_poic.plot(epochs, [float(r["poic"]) for r in rows], label=label)
    ax_ret.set_ylabel("mean return")
    ax_poic.set_ylabel("POIC")
    ax_poic.set_xlabel("epoch")
    ax_ret.legend(fontsize=8)
    return _save(fig, out)


def plot_correlation(
    table: MetricTable,
    x: str,
    y: str,
    out: str | Path,
    exclude: list[str] | tuple[str, ...] = (),
) -> Path:
    """Scatter of one metric against a score with a least-squares line"""
    plt = _pyplot()
    table = table.without(list(exclude)) if exclude else table
    keys = list(table.rows)
    xs = table.column(x, keys)
    ys = table.column(y, keys)
    result = pearson(xs, ys)

    fig, ax = plt.subplots(figsize=(6, 5))
    ax.scatter(xs, ys)
    for key, xv, yv in zip(keys, xs, ys):
        ax.annotate(key, (xv, yv), fontsize=7, xytext=(3, 3), textcoords="offset points")
    slope, intercept = np.polyfit(xs, ys, 1)
    line_x = np.linspace(xs.min(), xs.max(), 50)
    ax.plot(line_x, slope * line_x + intercept, "--k", linewidth=1)
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    ax.set_title(f"R={result.r:.3f}, p={result.p_value:.3g}")
    return _save(fig, out)


def plot_poic_curve(etas: Any, values: Any, out: str | Path, eta_star: float | None = None) -> Path:
    """POIC against log-spaced temperature"""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(np.asarray(etas), np.asarray(values))
    if eta_star is not None:
        ax.axvline(eta_star, color="k", linestyle=":", linewidth=1)
    ax.set_xlabel("eta")
    ax.set_ylabel("POIC")
    return _save(fig, out)
