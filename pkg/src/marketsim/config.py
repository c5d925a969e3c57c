"""Simulation configuration: schema, JSON loading, validation, hashing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields

BIAS_KINDS = ("none", "delay_discounting", "fear", "greed")


class ConfigError(ValueError):
    """Invalid or unparseable configuration; the message names the offending key."""


@dataclass(frozen=True)
class SimConfig:
    """All run parameters. Field names double as the JSON config keys.

    Trading-calendar constants: a step is one trading day, so a week is 5
    steps, a month 21 and a year 286.
    """

    agents: int = 100
    stocks: int = 1
    steps: int = 1000              # measured phase length
    runs: int = 5                  # independent runs per sweep cell
    learning_steps: int = 300
    week_steps: int = 5
    month_steps: int = 21
    year_steps: int = 286
    bias: str = "none"
    biased_pct: float = 0.0        # percentage of agents carrying the bias
    seed: int = 0

    # reinforcement learning
    learning_rate: float = 0.1
    temperature: float = 0.2

    # trading
    order_fraction: float = 0.2    # fraction of cash committed per buy order
    risk_free_rate: float = 0.0    # per-step interest on cash
    bankruptcy_fraction: float = 0.05

    # state discretization
    gap_thresholds: tuple[float, float] = (0.02, 0.10)
    trend_band: float = 0.01
    vol_quantiles: tuple[float, float] = (0.33, 0.67)

    # fundamental process; volatility None means drawn per run from the range
    fundamental_volatility: float | None = None
    fundamental_volatility_range: tuple[float, float] = (0.005, 0.02)
    jump_rate: float | None = None  # None means one jump per year on average
    jump_scale: float = 0.1
    observation_noise: float = 0.01
    valuation_bias_sigma: float = 0.1

    # initial endowments
    initial_price: float = 100.0
    initial_shares: int = 100
    cash_range: tuple[float, float] = (0.5, 2.0)

    # agent parameter draws
    gesture_range: tuple[float, float] = (0.2, 0.8)

    def __post_init__(self) -> None:
        checks = [
            ("agents", self.agents >= 2, "must be >= 2"),
            ("stocks", self.stocks >= 1, "must be >= 1"),
            ("steps", self.steps >= self.week_steps, "must be >= week_steps"),
            ("runs", self.runs >= 1, "must be >= 1"),
            ("learning_steps", self.learning_steps >= 0, "must be >= 0"),
            ("biased_pct", 0.0 <= self.biased_pct <= 100.0, "must be in [0, 100]"),
            ("bias", self.bias in BIAS_KINDS, f"must be one of {BIAS_KINDS}"),
            ("learning_rate", 0.0 < self.learning_rate <= 1.0, "must be in (0, 1]"),
            ("temperature", self.temperature > 0.0, "must be positive"),
            ("order_fraction", 0.0 < self.order_fraction <= 1.0, "must be in (0, 1]"),
            ("risk_free_rate", self.risk_free_rate >= 0.0, "must be >= 0"),
            ("bankruptcy_fraction", 0.0 < self.bankruptcy_fraction < 1.0, "must be in (0, 1)"),
            ("week_steps", 1 <= self.week_steps <= self.month_steps, "must be in [1, month_steps]"),
            ("initial_price", self.initial_price > 0.0, "must be positive"),
            ("initial_shares", self.initial_shares >= 0, "must be >= 0"),
            ("jump_scale", self.jump_scale >= 0.0, "must be >= 0"),
            ("observation_noise", self.observation_noise >= 0.0, "must be >= 0"),
        ]
        for key, ok, why in checks:
            if not ok:
                raise ConfigError(f"config key '{key}': {why}")
        lo, hi = self.gap_thresholds
        if not 0.0 < lo < hi:
            raise ConfigError("config key 'gap_thresholds': must be increasing and positive")
        qlo, qhi = self.vol_quantiles
        if not 0.0 < qlo < qhi < 1.0:
            raise ConfigError("config key 'vol_quantiles': must be increasing within (0, 1)")
        if self.fundamental_volatility is not None and self.fundamental_volatility < 0.0:
            raise ConfigError("config key 'fundamental_volatility': must be >= 0")
        if self.jump_rate is not None and self.jump_rate < 0.0:
            raise ConfigError("config key 'jump_rate': must be >= 0")

    # horizon of the longest-lived agent; bounds pending-reward queues
    @property
    def max_horizon(self) -> int:
        return 6 * self.month_steps

    @property
    def total_steps(self) -> int:
        return self.learning_steps + self.steps

    def effective_jump_rate(self) -> float:
        return self.jump_rate if self.jump_rate is not None else 1.0 / self.year_steps

    def to_dict(self) -> dict:
        d = asdict(self)
        for key, value in d.items():
            if isinstance(value, tuple):
                d[key] = list(value)
        return d

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


_TUPLE_KEYS = {
    "gap_thresholds",
    "vol_quantiles",
    "fundamental_volatility_range",
    "cash_range",
    "gesture_range",
}
_KNOWN_KEYS = {f.name for f in fields(SimConfig)}


def config_from_dict(data: dict) -> SimConfig:
    unknown = sorted(set(data) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key '{unknown[0]}'")
    kwargs = {}
    for key, value in data.items():
        if key in _TUPLE_KEYS:
            if not isinstance(value, (list, tuple)) or len(value) != 2:
                raise ConfigError(f"config key '{key}': expected a pair [low, high]")
            value = (float(value[0]), float(value[1]))
        kwargs[key] = value
    try:
        return SimConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str) -> SimConfig:
    """Parse and validate a JSON config file; absent keys take defaults."""
    with open(path) as fh:
        text = fh.read()
    if not text.strip():
        return SimConfig()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return config_from_dict(data)


def save_config(config: SimConfig, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
