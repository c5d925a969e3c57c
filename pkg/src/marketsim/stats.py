"""Metric battery over price/volume/spread series and agent summaries.

Every function here is a pure function of its inputs, usable on simulated
runs and on ingested real close-price series alike. Windowed statistics use
population (not sample) standard deviations and windows inclusive of t, so
results are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .engine import RunOutput


def log_returns(prices) -> np.ndarray:
    """Element-wise ln(P(t)/P(t-1)); output is one shorter than the input."""
    arr = np.asarray(prices, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("need a 1-d price series of length >= 2")
    if np.any(arr <= 0.0):
        raise ValueError("prices must be positive")
    return np.diff(np.log(arr))


def mean_abs_log_return(prices) -> float:
    return float(np.mean(np.abs(log_returns(prices))))


def rolling_volatility(prices, lag: int) -> np.ndarray:
    """Population std of each full trailing ``lag``-window, divided by P(t).

    One value per t >= lag-1; empty when the series is shorter than the lag.
    """
    if lag < 2:
        raise ValueError(f"lag must be >= 2, got {lag}")
    arr = np.asarray(prices, dtype=float)
    if arr.size < lag:
        return np.empty(0)
    windows = np.lib.stride_tricks.sliding_window_view(arr, lag)
    return windows.std(axis=1) / arr[lag - 1:]


def count_crashes(prices, threshold: float = 0.20) -> int:
    """Drops of more than ``threshold`` from the running peak; the peak
    resets to the current price after each crash."""
    arr = np.asarray(prices, dtype=float)
    if arr.size == 0:
        return 0
    peak = arr[0]
    crashes = 0
    floor_factor = 1.0 - threshold
    for price in arr[1:]:
        if price < floor_factor * peak:
            crashes += 1
            peak = price
        elif price > peak:
            peak = price
    return crashes


def run_length_distribution(prices) -> dict[int, int]:
    """Histogram of maximal runs of rising (+k) and falling (-k) prices.

    A run of k consecutive strictly positive one-step changes contributes
    one count at key +k; strictly negative runs count at -k. Zero changes
    end the current run and belong to none.
    """
    arr = np.asarray(prices, dtype=float)
    if arr.size < 2:
        raise ValueError("need at least 2 prices")
    histogram: dict[int, int] = {}
    sign = 0
    length = 0

    def flush() -> None:
        if length > 0:
            key = sign * length
            histogram[key] = histogram.get(key, 0) + 1

    for delta in np.diff(arr):
        s = 1 if delta > 0 else (-1 if delta < 0 else 0)
        if s == sign:
            length += s != 0
        else:
            flush()
            sign = s
            length = 1 if s != 0 else 0
    flush()
    return histogram


def gesture_by_performance_decile(agents) -> tuple[float, float]:
    """Mean gesture g of the best and worst NAV deciles.

    ``agents`` are records with ``final_nav``, ``g`` and ``agent_id``
    attributes. Agents are ranked by final NAV, ties broken by agent index;
    each decile holds ceil(n/10) agents.
    """
    if len(agents) < 10:
        raise ValueError(f"need at least 10 agents, got {len(agents)}")
    ranked = sorted(agents, key=lambda a: (-a.final_nav, a.agent_id))
    k = math.ceil(len(ranked) / 10)
    best = sum(a.g for a in ranked[:k]) / k
    worst = sum(a.g for a in ranked[-k:]) / k
    return best, worst


def bankruptcy_rate(agents) -> float:
    """Fraction of agents flagged bankrupt."""
    if not len(agents):
        raise ValueError("need at least one agent")
    return sum(1 for a in agents if a.bankrupt) / len(agents)


def excess_kurtosis(returns) -> float:
    """Fourth standardized moment minus 3 (population moments)."""
    arr = np.asarray(returns, dtype=float)
    if arr.size < 2:
        raise ValueError("need at least 2 return observations")
    centered = arr - arr.mean()
    m2 = float(np.mean(centered**2))
    if m2 == 0.0:
        raise ValueError("zero variance: kurtosis undefined")
    m4 = float(np.mean(centered**4))
    return m4 / (m2 * m2) - 3.0


@dataclass(slots=True)
class MetricsReport:
    """Scalar metric battery for one series (or an aggregate over runs).

    Fields that require data a given source lacks (spread for real close
    series, agents for any non-simulated input, kurtosis for degenerate
    series) are None and omitted from serialized forms.
    """

    mean_abs_log_return: float
    volatility_by_lag: dict[int, float | None]
    mean_volume: float | None
    crash_count: float
    run_length_histogram: dict[int, int]
    mean_spread_pct: float | None = None
    bankruptcy_rate: float | None = None
    excess_kurtosis: float | None = None
    gesture_best10_mean: float | None = None
    gesture_worst10_mean: float | None = None

    def flat_dict(self) -> dict:
        """Flat JSON-ready form; the histogram keeps signed string keys."""
        out: dict = {"mean_abs_log_return": self.mean_abs_log_return}
        for lag in sorted(self.volatility_by_lag):
            value = self.volatility_by_lag[lag]
            if value is not None:
                out[f"volatility_{lag}"] = value
        for name in (
            "mean_volume",
            "mean_spread_pct",
            "crash_count",
            "bankruptcy_rate",
            "excess_kurtosis",
            "gesture_best10_mean",
            "gesture_worst10_mean",
        ):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        out["run_length_histogram"] = {
            f"{k:+d}": self.run_length_histogram[k]
            for k in sorted(self.run_length_histogram)
        }
        return out

    def summary_rows(self) -> list[tuple[str, float]]:
        """(metric, value) rows for the sweep summary CSV."""
        rows: list[tuple[str, float]] = []
        for key, value in self.flat_dict().items():
            if key == "run_length_histogram":
                for hk in sorted(value):
                    rows.append((f"run_length_{hk}", value[hk]))
            else:
                rows.append((key, value))
        return rows


def _mean_or_none(values: list[float | None]) -> float | None:
    if any(v is None for v in values):
        return None
    return sum(values) / len(values)


def metrics_for_prices(
    prices,
    volumes=None,
    spread_pct=None,
    agents=None,
    lags: tuple[int, ...] = (5, 21, 126),
) -> MetricsReport:
    """Full battery over one price series plus whatever extras exist."""
    vol_by_lag: dict[int, float | None] = {}
    for lag in lags:
        values = rolling_volatility(prices, lag)
        vol_by_lag[lag] = float(values.mean()) if values.size else None
    try:
        kurt = excess_kurtosis(log_returns(prices))
    except ValueError:
        kurt = None
    best = worst = rate = None
    if agents is not None and len(agents) >= 10:
        best, worst = gesture_by_performance_decile(agents)
    if agents is not None and len(agents):
        rate = bankruptcy_rate(agents)
    return MetricsReport(
        mean_abs_log_return=mean_abs_log_return(prices),
        volatility_by_lag=vol_by_lag,
        mean_volume=float(np.mean(volumes)) if volumes is not None and len(volumes) else None,
        crash_count=count_crashes(prices),
        run_length_histogram=run_length_distribution(prices),
        mean_spread_pct=float(np.mean(spread_pct)) if spread_pct is not None and len(spread_pct) else None,
        bankruptcy_rate=rate,
        excess_kurtosis=kurt,
        gesture_best10_mean=best,
        gesture_worst10_mean=worst,
    )


def metrics_for_run(run: "RunOutput", stock: int = 0) -> MetricsReport:
    """Battery over the measured phase of one simulated run."""
    config = run.config
    return metrics_for_prices(
        run.measured_prices(stock),
        volumes=run.measured_volumes(stock),
        spread_pct=run.measured_spread_pct(stock),
        agents=run.agents,
        lags=(config.week_steps, config.month_steps, 6 * config.month_steps),
    )


def aggregate_reports(reports: list[MetricsReport]) -> MetricsReport:
    """Cell aggregate: means of scalar metrics, summed run-length counts."""
    if not reports:
        raise ValueError("need at least one report")
    lags = sorted(reports[0].volatility_by_lag)
    histogram: dict[int, int] = {}
    for report in reports:
        for key, count in report.run_length_histogram.items():
            histogram[key] = histogram.get(key, 0) + count
    return MetricsReport(
        mean_abs_log_return=sum(r.mean_abs_log_return for r in reports) / len(reports),
        volatility_by_lag={
            lag: _mean_or_none([r.volatility_by_lag.get(lag) for r in reports])
            for lag in lags
        },
        mean_volume=_mean_or_none([r.mean_volume for r in reports]),
        crash_count=sum(r.crash_count for r in reports) / len(reports),
        run_length_histogram=histogram,
        mean_spread_pct=_mean_or_none([r.mean_spread_pct for r in reports]),
        bankruptcy_rate=_mean_or_none([r.bankruptcy_rate for r in reports]),
        excess_kurtosis=_mean_or_none([r.excess_kurtosis for r in reports]),
        gesture_best10_mean=_mean_or_none([r.gesture_best10_mean for r in reports]),
        gesture_worst10_mean=_mean_or_none([r.gesture_worst10_mean for r in reports]),
    )
