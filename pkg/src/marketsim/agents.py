"""Trader agents: parameter draws, state encoding, forecasting, trading, biases.

Each trader runs two tabular policies. The forecasting policy picks an
econometric rule and produces a price prediction at the trader's investment
horizon; the trading policy turns that prediction into a limit order. Both
receive their rewards with a delay of one investment horizon, through
per-trader pending queues.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .config import SimConfig
from .fundamentals import AgentFundamentalLens, FundamentalSeries, agent_fundamental_estimate
from .market import MarketHistory, SlidingQuantile
from .orderbook import Order, Side
from .policy import (
    BUY,
    HOLD,
    SELL,
    ForecastAction,
    ForecastState,
    TabularPolicy,
    TradeAction,
    TradeState,
    forecast_policy,
    trade_policy,
)


class Bias(Enum):
    NONE = "none"
    DELAY_DISCOUNTING = "delay_discounting"
    FEAR = "fear"
    GREED = "greed"


@dataclass(frozen=True, slots=True)
class AgentParams:
    """Fixed per-trader psychological and trading parameters."""

    tau: int            # investment horizon: steps until rewards realize
    h: int              # memory interval for running statistics
    g: float            # transaction gesture, scales the quoting offset
    rho: float          # reflexivity amplitude: max weight on fundamentals
    bias: Bias
    order_fraction: float


@dataclass(slots=True)
class Portfolio:
    """Cash and per-stock share holdings, with the initial snapshot kept for resets."""

    cash: float
    holdings: list[int]
    initial_cash: float
    initial_holdings: list[int]
    reserved: float = 0.0   # cash committed to this step's buy orders

    @property
    def free_cash(self) -> float:
        return self.cash - self.reserved

    def reset(self) -> None:
        self.cash = self.initial_cash
        self.holdings = list(self.initial_holdings)
        self.reserved = 0.0


@dataclass(slots=True)
class PendingForecast:
    made_at: int
    stock: int
    horizon: int
    predicted_price: float
    state: ForecastState
    action: ForecastAction

    @property
    def matures_at(self) -> int:
        return self.made_at + self.horizon


@dataclass(slots=True)
class PendingTrade:
    """A trade decision awaiting reward realization.

    ``quantity`` and ``notional`` accumulate the fills the order received at
    clearing; both stay zero for holds and unfilled orders.
    """

    executed_at: int
    stock: int
    side: int           # a0 code: SELL / HOLD / BUY
    horizon: int
    state: TradeState
    action: TradeAction
    quantity: int = 0
    notional: float = 0.0

    @property
    def matures_at(self) -> int:
        return self.executed_at + self.horizon

    @property
    def exec_price(self) -> float | None:
        return self.notional / self.quantity if self.quantity > 0 else None


def apply_bias_override(
    bias: Bias,
    state: TradeState,
    action: TradeAction,
    rng: np.random.Generator,
) -> TradeAction:
    """Fear and greed overrides, armed on average once every five steps.

    An armed fear trader is forced to sell under high volatility, low cash
    or an illiquid stock; an armed greed trader is forced to buy when the
    forecast trend points up. Delay discounting acts only through the
    horizon drawn at initialization, so it (and no bias) passes through.
    """
    if bias is Bias.FEAR:
        if rng.random() < 0.2 and (state.s1 == 2 or state.s2 == 0 or state.s4 == 0):
            return TradeAction(SELL, action.a1)
    elif bias is Bias.GREED:
        if rng.random() < 0.2 and state.s0 == 2:
            return TradeAction(BUY, action.a1)
    return action


def _level(value: float, lo: float, hi: float) -> int:
    if value <= lo:
        return 0
    if value <= hi:
        return 1
    return 2


class Trader:
    """One autonomous trader owning two policies and a portfolio."""

    def __init__(
        self,
        agent_id: int,
        params: AgentParams,
        portfolio: Portfolio,
        lens: AgentFundamentalLens,
        rng: np.random.Generator,
        config: SimConfig,
    ) -> None:
        self.agent_id = agent_id
        self.params = params
        self.portfolio = portfolio
        self.lens = lens
        self.rng = rng
        self.policy_f = forecast_policy(config.learning_rate, config.temperature)
        self.policy_t = trade_policy(config.learning_rate, config.temperature)
        self.bankrupt = False
        self.initial_nav = portfolio.initial_cash + sum(
            h * config.initial_price for h in portfolio.initial_holdings
        )

        self._week = config.week_steps
        self._month = config.month_steps
        self._gap_lo, self._gap_hi = config.gap_thresholds
        self._band = config.trend_band
        self._q_lo, self._q_hi = config.vol_quantiles
        self._lags = (config.week_steps, config.month_steps, 6 * config.month_steps)

        n = config.stocks
        self._month_win = [SlidingQuantile(params.h) for _ in range(n)]
        self._week_win = [SlidingQuantile(params.h) for _ in range(n)]
        self._liq_win = [SlidingQuantile(params.h) for _ in range(n)]
        self.pending_forecasts: list[deque[PendingForecast]] = [deque() for _ in range(n)]
        self.pending_trades: list[deque[PendingTrade]] = [deque() for _ in range(n)]

    # -- per-step observation ------------------------------------------------

    def observe(self, markets: list[MarketHistory]) -> None:
        """Push this step's market statistics into the trader's running windows."""
        for j, market in enumerate(markets):
            self._month_win[j].push(market.vol_month[-1])
            self._week_win[j].push(market.vol_week[-1])
            self._liq_win[j].push(market.mean_volume_week[-1])

    def estimate_fundamental(self, series: FundamentalSeries, t: int) -> float:
        return agent_fundamental_estimate(self.lens, series, t, self.rng)

    # -- forecasting ---------------------------------------------------------

    def _vol_level(self, win: SlidingQuantile, value: float) -> int:
        return _level(value, win.quantile(self._q_lo), win.quantile(self._q_hi))

    def encode_forecast_state(self, market: MarketHistory, stock: int, estimate: float) -> ForecastState:
        price = market.current_price
        s0 = self._vol_level(self._month_win[stock], market.vol_month[-1])
        s1 = self._vol_level(self._week_win[stock], market.vol_week[-1])
        gap = abs(estimate - price) / price
        s2 = 0 if gap < self._gap_lo else (1 if gap < self._gap_hi else 2)
        return ForecastState(s0, s1, s2)

    def forecast(self, market: MarketHistory, stock: int, t: int, estimate: float) -> float:
        """Predict the price tau steps ahead and queue the pending forecast."""
        state = self.encode_forecast_state(market, stock, estimate)
        action = ForecastAction.from_index(self.policy_f.select_action(state.index, self.rng))
        lag = self._lags[action.a1]
        if lag > self.params.h:
            lag = self.params.h
        price = market.current_price
        if action.a0 == 0:      # mean-reverting
            chartist = 2.0 * market.window_mean(lag) - price
        elif action.a0 == 1:    # averaging
            chartist = market.window_mean(lag)
        else:                   # trend-following
            chartist = market.trend_forecast(lag, self.params.tau)
        w = self.params.rho * (0.2, 0.5, 0.8)[action.a2]
        predicted = w * estimate + (1.0 - w) * chartist
        floor = 0.01 * price
        if predicted < floor:
            predicted = floor
        self.pending_forecasts[stock].append(
            PendingForecast(t, stock, self.params.tau, predicted, state, action)
        )
        return predicted

    def realize_forecast_reward(self, t: int, price: float, stock: int) -> tuple[float, int]:
        """Realize every matured forecast; returns (reward sum, count) for tracing."""
        queue = self.pending_forecasts[stock]
        total = 0.0
        count = 0
        while queue and queue[0].matures_at <= t:
            pending = queue.popleft()
            reward = -abs(price - pending.predicted_price) / price
            self.policy_f.update(pending.state.index, pending.action.index, reward)
            total += reward
            count += 1
        return total, count

    # -- trading -------------------------------------------------------------

    def encode_trade_state(self, market: MarketHistory, stock: int, forecast_price: float) -> TradeState:
        price = market.current_price
        rel = (forecast_price - price) / price
        s0 = 0 if rel < -self._band else (1 if rel <= self._band else 2)
        s1 = self._vol_level(self._week_win[stock], market.vol_week[-1])
        s2 = 1 if self.portfolio.cash >= self.portfolio.initial_cash else 0
        s3 = 1 if self.portfolio.holdings[stock] >= self.portfolio.initial_holdings[stock] else 0
        liquidity = market.mean_volume_week[-1]
        if liquidity == 0.0:
            s4 = 0
        else:
            s4 = 1 if liquidity < self._liq_win[stock].quantile(0.5) else 2
        return TradeState(s0, s1, s2, s3, s4)

    def decide_trade(
        self, market: MarketHistory, stock: int, t: int, forecast_price: float
    ) -> Order | None:
        """Choose an action, apply any bias override, and emit at most one order.

        Buys commit ``order_fraction`` of free cash at the limit price; sells
        liquidate the whole position. A buy without cash or a sell without
        shares degrades to no order while still being recorded as the chosen
        action, so the policy learns from it.
        """
        state = self.encode_trade_state(market, stock, forecast_price)
        action = TradeAction.from_index(self.policy_t.select_action(state.index, self.rng))
        action = apply_bias_override(self.params.bias, state, action, self.rng)

        pending = PendingTrade(t, stock, action.a0, self.params.tau, state, action)
        self.pending_trades[stock].append(pending)
        if action.a0 == HOLD:
            return None

        price = market.current_price
        # a1 stance shifts the quote by the gesture, scaled with the spread
        offset = (self.params.g * market.current_spread, 0.0, -self.params.g * market.current_spread)[action.a1]
        limit = forecast_price + offset
        floor = 0.01 * price
        if limit < floor:
            limit = floor

        if action.a0 == BUY:
            quantity = int(self.params.order_fraction * self.portfolio.free_cash / limit)
            if quantity < 1:
                return None
            self.portfolio.reserved += quantity * limit
            return Order(self.agent_id, stock, Side.BID, quantity, limit)
        quantity = self.portfolio.holdings[stock]
        if quantity < 1:
            return None
        return Order(self.agent_id, stock, Side.ASK, quantity, limit)

    def realize_trade_reward(self, t: int, price: float, stock: int) -> None:
        """Realize matured trade decisions against the current price.

        The reward of a filled order is its round-trip return as if the
        position closed now at P(t); holds and unfilled orders earn zero,
        their own counterfactual.
        """
        queue = self.pending_trades[stock]
        while queue and queue[0].matures_at <= t:
            pending = queue.popleft()
            q = pending.quantity
            if q > 0:
                p = pending.notional / q
                if pending.side == BUY:
                    reward = q * (price - p) / (q * p)
                else:
                    reward = q * (p - price) / (q * p)
            else:
                reward = 0.0
            self.policy_t.update(pending.state.index, pending.action.index, reward)

    def mark_to_market(self, prices: list[float]) -> float:
        return self.portfolio.cash + sum(
            h * p for h, p in zip(self.portfolio.holdings, prices)
        )


def init_agent(config: SimConfig, agent_id: int, biased: bool, rng: np.random.Generator) -> Trader:
    """Draw a fresh trader. ``biased`` marks it with the config's bias kind.

    Delay-discounting traders draw their horizon from {week, ..., 2*week-1}
    instead of the full {week, ..., 6*month} range; the draw sequence is the
    same either way so populations with different bias mixes stay paired
    under a common seed.
    """
    week, month = config.week_steps, config.month_steps
    bias = Bias(config.bias) if biased else Bias.NONE
    if bias is Bias.DELAY_DISCOUNTING:
        tau = int(rng.integers(week, 2 * week))
    else:
        tau = int(rng.integers(week, 6 * month, endpoint=True))
    h = int(rng.integers(week, config.steps, endpoint=True))
    g = rng.uniform(*config.gesture_range)
    rho = rng.uniform(0.0, 1.0)
    cash_scale = rng.uniform(*config.cash_range)
    eps = rng.normal(0.0, config.valuation_bias_sigma)

    params = AgentParams(
        tau=tau,
        h=h,
        g=g,
        rho=rho,
        bias=bias,
        order_fraction=config.order_fraction,
    )
    cash = config.initial_shares * config.initial_price * cash_scale
    portfolio = Portfolio(
        cash=cash,
        holdings=[config.initial_shares] * config.stocks,
        initial_cash=cash,
        initial_holdings=[config.initial_shares] * config.stocks,
    )
    lens = AgentFundamentalLens(
        multiplicative_bias=math.exp(eps),
        observation_noise_scale=config.observation_noise,
    )
    return Trader(agent_id, params, portfolio, lens, rng, config)
