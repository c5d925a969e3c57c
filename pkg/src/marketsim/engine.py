"""Run orchestration: seeding, the step loop, phase reset, and sweeps.

A run is a pure function of (config, run_index). Every source of randomness
gets its own stream keyed by (master seed, run index, lane), so the agent
population and the fundamental path of run r are identical across sweep
cells; only the bias mix differs. That pairing reduces the variance of
cross-cell comparisons.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, replace

import numpy as np

from .agents import Trader, init_agent
from .config import SimConfig
from .fundamentals import FundamentalSeries, generate_fundamental_series
from .market import MarketHistory
from .orderbook import ClearingResult, Order, Side, clear_auction
from .stats import MetricsReport, aggregate_reports, metrics_for_run

_MASK64 = (1 << 64) - 1


def substream(master_seed: int, run_index: int, *lane: int | str) -> np.random.Generator:
    """Dedicated rng stream for one lane of one run.

    String lane parts hash via crc32, which is stable across platforms and
    Python processes, so adding new lanes never shifts existing streams.
    """
    entropy = [int(master_seed) & _MASK64, int(run_index)]
    for part in lane:
        entropy.append(zlib.crc32(part.encode()) if isinstance(part, str) else int(part))
    return np.random.default_rng(np.random.SeedSequence(entropy))


@dataclass(frozen=True, slots=True)
class AgentSummary:
    """Per-agent record exported at the end of a run."""

    agent_id: int
    bias: str
    tau: int
    h: int
    g: float
    rho: float
    initial_nav: float
    final_nav: float
    bankrupt: bool


@dataclass(slots=True)
class StepRecord:
    """What one step did; returned by Simulation.step for inspection."""

    t: int
    orders: list[list[Order]]          # per stock, in submission order
    results: list[ClearingResult]      # per stock


@dataclass(slots=True)
class RunOutput:
    """All per-step series of one run, aligned with the price path.

    Arrays have length total_steps + 1; index 0 is the initial state, index
    t >= 1 the outcome of step t. ``volumes[0]`` and ``spreads[0]`` are zero
    placeholders since no auction happens at t=0.
    """

    config: SimConfig
    run_index: int
    prices: list[np.ndarray]           # per stock
    fundamentals: list[np.ndarray]
    volumes: list[np.ndarray]
    spreads: list[np.ndarray]
    bankrupt_count: np.ndarray
    forecast_reward_sum: np.ndarray    # realized forecast rewards, per step
    forecast_reward_count: np.ndarray
    total_cash: np.ndarray             # settlement audit trail
    total_shares: list[np.ndarray]
    agents: list[AgentSummary]

    # measured-phase views; prices keep the boundary point so that the first
    # measured return is defined
    def measured_prices(self, stock: int = 0) -> np.ndarray:
        return self.prices[stock][self.config.learning_steps:]

    def measured_fundamentals(self, stock: int = 0) -> np.ndarray:
        return self.fundamentals[stock][self.config.learning_steps:]

    def measured_volumes(self, stock: int = 0) -> np.ndarray:
        return self.volumes[stock][self.config.learning_steps + 1:]

    def measured_spreads(self, stock: int = 0) -> np.ndarray:
        return self.spreads[stock][self.config.learning_steps + 1:]

    def measured_spread_pct(self, stock: int = 0) -> np.ndarray:
        start = self.config.learning_steps + 1
        return self.spreads[stock][start:] / self.prices[stock][start:]


class Simulation:
    """Mutable state of one run; ``step`` advances it by one auction."""

    def __init__(self, config: SimConfig, run_index: int = 0) -> None:
        self.config = config
        self.run_index = run_index

        self.series: list[FundamentalSeries] = []
        for j in range(config.stocks):
            rng = substream(config.seed, run_index, "fundamental", j)
            sigma = config.fundamental_volatility
            if sigma is None:
                sigma = float(rng.uniform(*config.fundamental_volatility_range))
            self.series.append(
                generate_fundamental_series(
                    config.total_steps + config.max_horizon + 1,
                    rng,
                    start=config.initial_price,
                    step_volatility=sigma,
                    jump_rate=config.effective_jump_rate(),
                    jump_scale=config.jump_scale,
                )
            )

        n_biased = int(config.agents * config.biased_pct / 100.0)
        self.traders: list[Trader] = [
            init_agent(config, i, i < n_biased, substream(config.seed, run_index, "agent", i))
            for i in range(config.agents)
        ]
        self.markets = [
            MarketHistory(config.initial_price, config.week_steps, config.month_steps)
            for _ in range(config.stocks)
        ]
        self._reset_done = False

        self.bankrupt_count: list[int] = [0]
        self.forecast_reward_sum: list[float] = [0.0]
        self.forecast_reward_count: list[int] = [0]
        self.total_cash: list[float] = [math.fsum(tr.portfolio.cash for tr in self.traders)]
        self.total_shares: list[list[int]] = [
            [sum(tr.portfolio.holdings[j] for tr in self.traders)]
            for j in range(config.stocks)
        ]

    @property
    def t(self) -> int:
        return self.markets[0].t

    def step(self) -> StepRecord:
        config = self.config
        traders = self.traders
        markets = self.markets
        n_stocks = config.stocks
        now = self.t

        if now == config.learning_steps and not self._reset_done:
            for tr in traders:
                tr.portfolio.reset()
                tr.bankrupt = False
            self._reset_done = True

        for market in markets:
            market.begin_step()
        for tr in traders:
            tr.observe(markets)

        # matured rewards realize against the pre-clearing price
        f_sum = 0.0
        f_count = 0
        for j, market in enumerate(markets):
            price = market.current_price
            for tr in traders:
                s, c = tr.realize_forecast_reward(now, price, j)
                f_sum += s
                f_count += c
                tr.realize_trade_reward(now, price, j)

        # decisions, collected per stock in agent-index order
        bids: list[list[Order]] = [[] for _ in range(n_stocks)]
        asks: list[list[Order]] = [[] for _ in range(n_stocks)]
        orders: list[list[Order]] = [[] for _ in range(n_stocks)]
        for tr in traders:
            for j in range(n_stocks):
                estimate = tr.estimate_fundamental(self.series[j], now)
                predicted = tr.forecast(markets[j], j, now, estimate)
                if tr.bankrupt:
                    continue
                order = tr.decide_trade(markets[j], j, now, predicted)
                if order is not None:
                    orders[j].append(order)
                    (bids[j] if order.side is Side.BID else asks[j]).append(order)

        results: list[ClearingResult] = []
        for j, market in enumerate(markets):
            result = clear_auction(bids[j], asks[j], market.current_price)
            for trade in result.trades:
                notional = trade.quantity * trade.price
                buyer = traders[trade.buyer_id]
                buyer.portfolio.cash -= notional
                buyer.portfolio.holdings[j] += trade.quantity
                pending = buyer.pending_trades[j][-1]
                pending.quantity += trade.quantity
                pending.notional += notional
                seller = traders[trade.seller_id]
                seller.portfolio.cash += notional
                seller.portfolio.holdings[j] -= trade.quantity
                pending = seller.pending_trades[j][-1]
                pending.quantity += trade.quantity
                pending.notional += notional
            market.record_clearing(result.market_price, result.volume, result.spread)
            results.append(result)

        rate = config.risk_free_rate
        for tr in traders:
            tr.portfolio.reserved = 0.0
            if rate:
                tr.portfolio.cash *= 1.0 + rate

        prices_now = [m.current_price for m in markets]
        n_bankrupt = 0
        for tr in traders:
            if not tr.bankrupt and tr.mark_to_market(prices_now) < config.bankruptcy_fraction * tr.initial_nav:
                tr.bankrupt = True
            if tr.bankrupt:
                n_bankrupt += 1

        self.bankrupt_count.append(n_bankrupt)
        self.forecast_reward_sum.append(f_sum)
        self.forecast_reward_count.append(f_count)
        self.total_cash.append(math.fsum(tr.portfolio.cash for tr in traders))
        for j in range(n_stocks):
            self.total_shares[j].append(sum(tr.portfolio.holdings[j] for tr in traders))
        return StepRecord(t=now + 1, orders=orders, results=results)

    def output(self) -> RunOutput:
        prices_now = [m.current_price for m in self.markets]
        summaries = [
            AgentSummary(
                agent_id=tr.agent_id,
                bias=tr.params.bias.value,
                tau=tr.params.tau,
                h=tr.params.h,
                g=tr.params.g,
                rho=tr.params.rho,
                initial_nav=tr.initial_nav,
                final_nav=tr.mark_to_market(prices_now),
                bankrupt=tr.bankrupt,
            )
            for tr in self.traders
        ]
        prices, fundamentals, volumes, spreads, shares = [], [], [], [], []
        for j, market in enumerate(self.markets):
            n = len(market.prices)
            prices.append(np.asarray(market.prices))
            fundamentals.append(self.series[j].values[:n].copy())
            volumes.append(np.concatenate(([0], np.asarray(market.volumes, dtype=np.int64))))
            spreads.append(np.concatenate(([0.0], np.asarray(market.spreads))))
            shares.append(np.asarray(self.total_shares[j], dtype=np.int64))
        return RunOutput(
            config=self.config,
            run_index=self.run_index,
            prices=prices,
            fundamentals=fundamentals,
            volumes=volumes,
            spreads=spreads,
            bankrupt_count=np.asarray(self.bankrupt_count, dtype=np.int64),
            forecast_reward_sum=np.asarray(self.forecast_reward_sum),
            forecast_reward_count=np.asarray(self.forecast_reward_count, dtype=np.int64),
            total_cash=np.asarray(self.total_cash),
            total_shares=shares,
            agents=summaries,
        )


def run_simulation(config: SimConfig, run_index: int = 0) -> RunOutput:
    """One full run: learning phase, portfolio reset, measured phase."""
    sim = Simulation(config, run_index)
    for _ in range(config.total_steps):
        sim.step()
    return sim.output()


@dataclass(slots=True)
class SweepOutput:
    """All runs of a sweep over the biased-population percentage."""

    bias: str
    p_grid: list[float]
    cells: dict[float, list[RunOutput]]
    reports: dict[float, list[MetricsReport]]
    aggregates: dict[float, MetricsReport]


def run_sweep(config: SimConfig, p_grid: list[float]) -> SweepOutput:
    """config.runs independent runs per grid value, serially.

    Cells are fully independent (each is a pure function of its own config
    and run index), so they could run in parallel; results are folded in
    grid order either way.
    """
    cells: dict[float, list[RunOutput]] = {}
    reports: dict[float, list[MetricsReport]] = {}
    aggregates: dict[float, MetricsReport] = {}
    for p_raw in p_grid:
        p = float(p_raw)
        # a cell with no biased agents behaves identically under every bias
        # kind, so its effective config drops the label
        bias = config.bias if p > 0 else "none"
        cell_config = replace(config, biased_pct=p, bias=bias)
        runs = [run_simulation(cell_config, r) for r in range(config.runs)]
        cells[p] = runs
        reports[p] = [metrics_for_run(run) for run in runs]
        aggregates[p] = aggregate_reports(reports[p])
    return SweepOutput(
        bias=config.bias,
        p_grid=[float(p) for p in p_grid],
        cells=cells,
        reports=reports,
        aggregates=aggregates,
    )
