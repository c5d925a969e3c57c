"""Deterministic multi-agent stock market simulator.

Reinforcement-learning traders with heterogeneous horizons, memories and
behavioral biases meet in a batch double auction; the package runs seeded
simulations, sweeps over biased-population percentages, and computes a
metric battery over the resulting series.
"""

from .agents import AgentParams, Bias, Portfolio, Trader, apply_bias_override, init_agent
from .config import BIAS_KINDS, ConfigError, SimConfig, config_from_dict, load_config, save_config
from .engine import (
    AgentSummary,
    RunOutput,
    Simulation,
    SweepOutput,
    run_simulation,
    run_sweep,
    substream,
)
from .fundamentals import (
    AgentFundamentalLens,
    FundamentalSeries,
    agent_fundamental_estimate,
    generate_fundamental_series,
)
from .market import MarketHistory, SlidingQuantile
from .orderbook import ClearingResult, Order, Side, Trade, clear_auction
from .policy import (
    ForecastAction,
    ForecastState,
    NonFiniteRewardError,
    TabularPolicy,
    TradeAction,
    TradeState,
    forecast_policy,
    trade_policy,
)
from .stats import (
    MetricsReport,
    aggregate_reports,
    bankruptcy_rate,
    count_crashes,
    excess_kurtosis,
    gesture_by_performance_decile,
    log_returns,
    mean_abs_log_return,
    metrics_for_prices,
    metrics_for_run,
    rolling_volatility,
    run_length_distribution,
)

__version__ = "0.1.0"
