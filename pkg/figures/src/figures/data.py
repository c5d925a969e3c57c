"""Readers for the simulator's CSV artifacts.

Everything here is a pure file consumer: the sweep summary supplies per-run
metric rows, and the per-run CSVs next to it supply raw price and spread
series for the distribution figures. Nothing is recomputed or simulated.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SUMMARY_HEADER = ["bias", "p", "run", "metric", "value"]
RUN_HEADER = ["t", "phase", "price", "volume", "spread", "fundamental", "bankrupt_count"]


class FigureDataError(Exception):
    """Input files do not match the expected artifact schema."""


@dataclass
class RunSeries:
    """Price and spread path of one run CSV, split by phase tag."""

    phases: list[str]
    prices: np.ndarray
    spreads: np.ndarray

    def measured_log_returns(self) -> np.ndarray:
        logs = np.log(self.prices)
        steps = np.diff(logs)
        keep = [self.phases[i] == "measured" for i in range(1, len(self.phases))]
        return steps[np.asarray(keep, dtype=bool)] if steps.size else steps

    def measured_spread_pct(self) -> np.ndarray:
        keep = np.asarray([ph == "measured" for ph in self.phases], dtype=bool)
        return (self.spreads / self.prices)[keep]


@dataclass
class SweepTable:
    """Parsed sweep summary plus the directory layout around it."""

    path: Path
    bias: str
    p_labels: list[str]                                  # sorted by numeric value
    runs: dict[str, list[int]]                           # p label -> run indexes
    values: dict[tuple[str, int], dict[str, float]] = field(repr=False)

    @property
    def p_floats(self) -> list[float]:
        return [float(label) for label in self.p_labels]

    def cell_means(self, metric: str, figure_id: str) -> list[float]:
        """Mean of a scalar metric over each p cell's runs."""
        means = []
        for label in self.p_labels:
            found = [
                self.values[(label, run)][metric]
                for run in self.runs[label]
                if metric in self.values[(label, run)]
            ]
            if not found:
                raise FigureDataError(
                    f"{figure_id}: sweep summary {self.path} has no metric column "
                    f"{metric!r}"
                )
            means.append(sum(found) / len(found))
        return means

    def volatility_lags(self) -> list[int]:
        lags = set()
        for metrics in self.values.values():
            for name in metrics:
                head, _, tail = name.partition("_")
                if head == "volatility" and tail.isdigit():
                    lags.add(int(tail))
        return sorted(lags)

    def run_length_histogram(self, label: str) -> dict[int, int]:
        """Signed run-length counts summed over one cell's runs."""
        total: dict[int, int] = {}
        for run in self.runs[label]:
            for name, value in self.values[(label, run)].items():
                if name.startswith("run_length_"):
                    key = int(name[len("run_length_"):])
                    total[key] = total.get(key, 0) + int(value)
        return total

    def run_series(self, label: str, run: int) -> list[RunSeries]:
        directory = self.path.parent / label / str(run)
        files = sorted(directory.glob("run_*.csv"))
        if not files:
            raise FigureDataError(f"no run CSVs under {directory}")
        return [load_run_csv(path) for path in files]

    def pooled(self, label: str, extract) -> np.ndarray:
        parts = [
            extract(series)
            for run in self.runs[label]
            for series in self.run_series(label, run)
        ]
        return np.concatenate(parts) if parts else np.empty(0)


def _data_rows(path: Path, expected_header: list[str]):
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    rows = [r for r in rows if r and not r[0].startswith("#")]
    if not rows or rows[0] != expected_header:
        raise FigureDataError(
            f"{path}: header must be {','.join(expected_header)!r}"
        )
    return rows[1:]


def load_sweep_summary(path: str | Path) -> SweepTable:
    path = Path(path)
    rows = _data_rows(path, SUMMARY_HEADER)
    if not rows:
        raise FigureDataError(f"{path}: no data rows")
    bias = rows[0][0]
    values: dict[tuple[str, int], dict[str, float]] = {}
    for i, row in enumerate(rows, start=2):
        if len(row) != 5:
            raise FigureDataError(f"{path}: row {i}: expected 5 fields, got {len(row)}")
        _, p_label, run_text, metric, value_text = row
        try:
            run = int(run_text)
            value = float(value_text)
            float(p_label)
        except ValueError as exc:
            raise FigureDataError(f"{path}: row {i}: non-numeric field") from exc
        values.setdefault((p_label, run), {})[metric] = value
    labels = sorted({label for label, _ in values}, key=float)
    runs = {
        label: sorted(run for cell_label, run in values if cell_label == label)
        for label in labels
    }
    return SweepTable(path=path, bias=bias, p_labels=labels, runs=runs, values=values)


def load_run_csv(path: str | Path) -> RunSeries:
    path = Path(path)
    rows = _data_rows(path, RUN_HEADER)
    phases, prices, spreads = [], [], []
    for row in rows:
        phases.append(row[1])
        prices.append(float(row[2]))
        spreads.append(float(row[4]))
    if not prices or any(not math.isfinite(p) or p <= 0 for p in prices):
        raise FigureDataError(f"{path}: prices must be positive and finite")
    return RunSeries(phases=phases, prices=np.asarray(prices), spreads=np.asarray(spreads))


def load_real_metrics(path: str | Path) -> dict:
    """Metrics JSON written by the simulator's analyze command."""
    with open(path) as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FigureDataError(f"{path}: not a metrics JSON file") from exc
    if not isinstance(data, dict):
        raise FigureDataError(f"{path}: expected a JSON object of metrics")
    return data
