"""Per-stock market history with O(1) rolling statistics.

Prefix sums over the price path make window means, least-squares trends and
windowed standard deviations constant-time, which keeps the per-step agent
loop cheap. A small sliding-window quantile structure supports the running
percentile thresholds agents use to discretize volatility and liquidity.
"""

from __future__ import annotations

import math
from bisect import bisect_left, insort
from collections import deque


class SlidingQuantile:
    """Quantiles over the trailing ``maxlen`` values of a streamed series.

    Keeps a sorted copy of the window; quantiles use linear interpolation
    (same convention as numpy).
    """

    __slots__ = ("maxlen", "_window", "_sorted")

    def __init__(self, maxlen: int) -> None:
        if maxlen < 1:
            raise ValueError("window length must be >= 1")
        self.maxlen = maxlen
        self._window: deque[float] = deque()
        self._sorted: list[float] = []

    def __len__(self) -> int:
        return len(self._window)

    def push(self, value: float) -> None:
        if len(self._window) == self.maxlen:
            oldest = self._window.popleft()
            del self._sorted[bisect_left(self._sorted, oldest)]
        self._window.append(value)
        insort(self._sorted, value)

    def quantile(self, q: float) -> float:
        data = self._sorted
        if not data:
            raise ValueError("quantile of empty window")
        pos = q * (len(data) - 1)
        lo = int(pos)
        frac = pos - lo
        if frac == 0.0 or lo + 1 >= len(data):
            return data[lo]
        return data[lo] + (data[lo + 1] - data[lo]) * frac


class MarketHistory:
    """Price/volume/spread history of one stock, growing one step at a time.

    The price path starts with the initial price, so after k cleared steps
    it holds k+1 points. ``begin_step`` snapshots the rolling statistics
    agents observe during the step; ``record_clearing`` appends the step's
    outcome (carrying the previous spread when the auction produced none).
    """

    def __init__(self, initial_price: float, week_steps: int, month_steps: int) -> None:
        self.week_steps = week_steps
        self.month_steps = month_steps
        self.prices: list[float] = [initial_price]
        self.volumes: list[int] = []
        self.spreads: list[float] = []
        # prefix sums over prices: sum, sum of i*p[i], sum of squares
        self._cum_p: list[float] = [0.0, initial_price]
        self._cum_ip: list[float] = [0.0, 0.0]
        self._cum_p2: list[float] = [0.0, initial_price * initial_price]
        # per-step observable statistics, appended by begin_step
        self.vol_month: list[float] = []
        self.vol_week: list[float] = []
        self.mean_volume_week: list[float] = []

    @property
    def t(self) -> int:
        """Index of the step currently being simulated."""
        return len(self.prices) - 1

    @property
    def current_price(self) -> float:
        return self.prices[-1]

    @property
    def current_spread(self) -> float:
        return self.spreads[-1] if self.spreads else 0.0

    def window_mean(self, lag: int) -> float:
        n = len(self.prices)
        m = lag if lag < n else n
        return (self._cum_p[n] - self._cum_p[n - m]) / m

    def window_std_over_price(self, lag: int) -> float:
        """Population std of the trailing ``lag`` prices, divided by the last price."""
        n = len(self.prices)
        m = lag if lag < n else n
        a = n - m
        mean = (self._cum_p[n] - self._cum_p[a]) / m
        var = (self._cum_p2[n] - self._cum_p2[a]) / m - mean * mean
        if var < 0.0:
            var = 0.0
        return math.sqrt(var) / self.prices[-1]

    def trend_forecast(self, lag: int, horizon: int) -> float:
        """Least-squares line over the trailing window, extrapolated ``horizon`` steps ahead."""
        n = len(self.prices)
        m = lag if lag < n else n
        if m < 2:
            return self.prices[-1]
        a = n - m
        sy = self._cum_p[n] - self._cum_p[a]
        sxy = (self._cum_ip[n] - self._cum_ip[a]) - a * sy
        sx = m * (m - 1) / 2.0
        sxx = (m - 1) * m * (2 * m - 1) / 6.0
        denom = m * sxx - sx * sx
        slope = (m * sxy - sx * sy) / denom
        intercept = (sy - slope * sx) / m
        return intercept + slope * (m - 1 + horizon)

    def mean_recent_volume(self) -> float:
        k = len(self.volumes)
        if k == 0:
            return 0.0
        m = self.week_steps if self.week_steps < k else k
        return sum(self.volumes[-m:]) / m

    def begin_step(self) -> None:
        self.vol_month.append(self.window_std_over_price(self.month_steps))
        self.vol_week.append(self.window_std_over_price(self.week_steps))
        self.mean_volume_week.append(self.mean_recent_volume())

    def record_clearing(self, price: float, volume: int, spread: float | None) -> None:
        i = len(self.prices)
        self.prices.append(price)
        self._cum_p.append(self._cum_p[-1] + price)
        self._cum_ip.append(self._cum_ip[-1] + i * price)
        self._cum_p2.append(self._cum_p2[-1] + price * price)
        self.volumes.append(volume)
        self.spreads.append(spread if spread is not None else self.current_spread)
