"""Static figure rendering for simulator sweep artifacts."""

from .charts import FIGURE_IDS, RenderResult, render, render_all
from .data import (
    FigureDataError,
    RunSeries,
    SweepTable,
    load_real_metrics,
    load_run_csv,
    load_sweep_summary,
)

__all__ = [
    "FIGURE_IDS",
    "FigureDataError",
    "RenderResult",
    "RunSeries",
    "SweepTable",
    "load_real_metrics",
    "load_run_csv",
    "load_sweep_summary",
    "render",
    "render_all",
]
