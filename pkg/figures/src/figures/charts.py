"""Figure renderers: fifteen static charts from one sweep summary.

Each figure id maps to one chart kind; ids sharing a kind differ only in
which sweep they are pointed at. Mean charts put the biased-population
share p on the x axis; distribution charts overlay one curve per p.
"""

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .data import FigureDataError, SweepTable, load_real_metrics, load_sweep_summary

MEAN_METRIC = {
    "B1": "mean_abs_log_return",
    "B3": "mean_volume",
    "B4": "mean_spread_pct",
    "C2": "mean_abs_log_return",
    "C4": "mean_volume",
    "C5": "crash_count",
    "C6": "mean_spread_pct",
    "D1": "crash_count",
}
VOLATILITY_IDS = ("B2", "C3")
HISTOGRAM_IDS = ("B5", "C7")
GESTURE_ID = "B6"
RETURN_DIST_ID = "C1"
SPREAD_DIST_ID = "D2"

FIGURE_IDS = (
    "B1", "B2", "B3", "B4", "B5", "B6",
    "C1", "C2", "C3", "C4", "C5", "C6", "C7",
    "D1", "D2",
)

# shortest to longest lag, per the caption convention
LAG_COLORS = ("black", "red", "blue")
X_LABEL = "biased share p (%)"


@dataclass(frozen=True)
class RenderResult:
    """What one render produced: the image plus plotted series sizes."""

    figure_id: str
    path: Path
    p_labels: tuple[str, ...]
    series: dict[str, int]          # series label -> points or samples drawn


def _new_axes(title: str):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.set_title(title)
    return fig, ax


def _save(fig, out_path: Path) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, format="png", dpi=110)
    plt.close(fig)
    return out_path


def _real_line(ax, real: dict | None, metric: str, color="gray"):
    if real and isinstance(real.get(metric), (int, float)):
        ax.axhline(real[metric], linestyle="--", color=color, alpha=0.7, label="real")
        return True
    return False


def _mean_chart(figure_id: str, table: SweepTable, metric: str, real, out_path):
    means = table.cell_means(metric, figure_id)
    fig, ax = _new_axes(f"{figure_id}: {metric} by p")
    ax.plot(table.p_floats, means, marker="o", color="tab:blue", label=metric)
    overlaid = _real_line(ax, real, metric)
    ax.set_xlabel(X_LABEL)
    ax.set_ylabel(metric)
    if overlaid:
        ax.legend()
    series = {metric: len(means)}
    if overlaid:
        series["real"] = 1
    return series, _save(fig, out_path)


def _volatility_chart(figure_id: str, table: SweepTable, real, out_path):
    lags = table.volatility_lags()
    if not lags:
        raise FigureDataError(
            f"{figure_id}: sweep summary {table.path} has no metric column 'volatility_<lag>'"
        )
    fig, ax = _new_axes(f"{figure_id}: rolling volatility by p")
    series = {}
    for i, lag in enumerate(lags):
        metric = f"volatility_{lag}"
        means = table.cell_means(metric, figure_id)
        color = LAG_COLORS[i] if i < len(LAG_COLORS) else None
        ax.plot(table.p_floats, means, marker="o", color=color, label=f"lag {lag}")
        series[metric] = len(means)
        if real and isinstance(real.get(metric), (int, float)):
            ax.axhline(real[metric], linestyle="--", color=color, alpha=0.5)
            series[f"real_{metric}"] = 1
    ax.set_xlabel(X_LABEL)
    ax.set_ylabel("volatility")
    ax.legend()
    return series, _save(fig, out_path)


def _gesture_chart(figure_id: str, table: SweepTable, real, out_path):
    best = table.cell_means("gesture_best10_mean", figure_id)
    worst = table.cell_means("gesture_worst10_mean", figure_id)
    fig, ax = _new_axes(f"{figure_id}: gesture of best and worst deciles")
    ax.plot(table.p_floats, best, marker="o", color="blue", label="best decile")
    ax.plot(table.p_floats, worst, marker="o", color="red", label="worst decile")
    ax.set_xlabel(X_LABEL)
    ax.set_ylabel("mean gesture g")
    ax.legend()
    return {"gesture_best10_mean": len(best), "gesture_worst10_mean": len(worst)}, _save(fig, out_path)


def _histogram_chart(figure_id: str, table: SweepTable, real, out_path):
    labels = table.p_labels
    fig, axes = plt.subplots(1, len(labels), figsize=(3.4 * len(labels), 3.6), sharey=True)
    axes = np.atleast_1d(axes)
    fig.suptitle(f"{figure_id}: signed run lengths of returns")
    series = {}
    real_hist = (real or {}).get("run_length_histogram")
    for ax, label in zip(axes, labels):
        hist = table.run_length_histogram(label)
        keys = sorted(hist)
        ax.bar(keys, [hist[k] for k in keys], color="tab:blue")
        if isinstance(real_hist, dict) and real_hist:
            rk = sorted(int(k) for k in real_hist)
            ax.plot(rk, [real_hist[f"{k:+d}"] for k in rk], "x--", color="gray", alpha=0.7)
        ax.set_title(f"p={label}")
        ax.set_xlabel("run length")
        series[f"p={label}"] = len(keys)
    axes[0].set_ylabel("count")
    return series, _save(fig, out_path)


def _distribution_chart(figure_id, table, real, out_path, extract, value_label, gaussian):
    fig, ax = _new_axes(f"{figure_id}: {value_label} distribution by p")
    pools = {label: table.pooled(label, extract) for label in table.p_labels}
    finite = np.concatenate([v for v in pools.values() if v.size]) if pools else np.empty(0)
    if finite.size == 0:
        raise FigureDataError(f"{figure_id}: no measured samples in run CSVs")
    lo, hi = float(finite.min()), float(finite.max())
    if lo == hi:
        lo, hi = lo - 1e-6, hi + 1e-6
    bins = np.linspace(lo, hi, 61)
    centers = (bins[:-1] + bins[1:]) / 2
    cmap = plt.get_cmap("viridis")
    series = {}
    for i, label in enumerate(table.p_labels):
        samples = pools[label]
        density, _ = np.histogram(samples, bins=bins, density=True)
        color = cmap(i / max(len(table.p_labels) - 1, 1))
        ax.plot(centers, density, color=color, label=f"p={label}")
        series[f"p={label}"] = int(samples.size)
    if gaussian:
        base = pools[table.p_labels[0]]
        mu, sigma = float(base.mean()), float(base.std())
        if sigma > 0:
            pdf = np.exp(-((centers - mu) ** 2) / (2 * sigma ** 2)) / (sigma * np.sqrt(2 * np.pi))
            ax.plot(centers, pdf, "--", color="black", label="gaussian")
            series["gaussian"] = len(centers)
    ax.set_xlabel(value_label)
    ax.set_ylabel("density")
    ax.legend()
    return series, _save(fig, out_path)


def _render_loaded(figure_id: str, table: SweepTable, out_path, real=None) -> RenderResult:
    if figure_id in MEAN_METRIC:
        series, path = _mean_chart(figure_id, table, MEAN_METRIC[figure_id], real, out_path)
    elif figure_id in VOLATILITY_IDS:
        series, path = _volatility_chart(figure_id, table, real, out_path)
    elif figure_id in HISTOGRAM_IDS:
        series, path = _histogram_chart(figure_id, table, real, out_path)
    elif figure_id == GESTURE_ID:
        series, path = _gesture_chart(figure_id, table, real, out_path)
    elif figure_id == RETURN_DIST_ID:
        series, path = _distribution_chart(
            figure_id, table, real, out_path,
            lambda s: s.measured_log_returns(), "log return", gaussian=True,
        )
    elif figure_id == SPREAD_DIST_ID:
        series, path = _distribution_chart(
            figure_id, table, real, out_path,
            lambda s: s.measured_spread_pct(), "spread fraction of price", gaussian=False,
        )
    else:
        raise FigureDataError(f"unknown figure id {figure_id!r}")
    return RenderResult(
        figure_id=figure_id,
        path=path,
        p_labels=tuple(table.p_labels),
        series=series,
    )


def render(figure_id: str, sweep_csv, out_path, real_csv=None) -> RenderResult:
    """Render one figure id from a sweep summary CSV to an image file."""
    table = load_sweep_summary(sweep_csv)
    real = load_real_metrics(real_csv) if real_csv else None
    return _render_loaded(figure_id, table, out_path, real)


def render_all(sweep_csv, out_dir, real_csv=None, only=None) -> list[RenderResult]:
    """Render every requested figure id as <out_dir>/<id>.png."""
    wanted = list(only) if only else list(FIGURE_IDS)
    unknown = [fid for fid in wanted if fid not in FIGURE_IDS]
    if unknown:
        raise FigureDataError(f"unknown figure id {unknown[0]!r}")
    table = load_sweep_summary(sweep_csv)
    real = load_real_metrics(real_csv) if real_csv else None
    out_dir = Path(out_dir)
    return [
        _render_loaded(fid, table, out_dir / f"{fid}.png", real)
        for fid in wanted
    ]
