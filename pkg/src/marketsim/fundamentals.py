"""Exogenous per-stock fundamental price paths and agents' noisy views of them.

The fundamental is a geometric random walk with rare jumps, anchored at the
initial market price. Each agent observes it through a private lens: a
constant multiplicative bias plus fresh lognormal observation noise, which
keeps every agent's valuation cointegrated with the true path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(slots=True)
class FundamentalSeries:
    """One stock's fundamental price path, fixed for the whole run."""

    values: np.ndarray
    step_volatility: float
    jump_rate: float
    jump_scale: float


@dataclass(frozen=True, slots=True)
class AgentFundamentalLens:
    """An agent's private distortion of the fundamental series.

    ``multiplicative_bias`` is fixed at agent initialization;
    ``observation_noise_scale`` is the sigma of fresh per-call lognormal noise.
    """

    multiplicative_bias: float
    observation_noise_scale: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.multiplicative_bias) and self.multiplicative_bias > 0):
            raise ValueError(f"multiplicative bias must be positive and finite, got {self.multiplicative_bias}")


def generate_fundamental_series(
    length: int,
    rng: np.random.Generator,
    start: float = 100.0,
    step_volatility: float = 0.01,
    jump_rate: float = 0.0,
    jump_scale: float = 0.1,
) -> FundamentalSeries:
    """Generate a geometric random walk of ``length`` values starting at ``start``.

    Log-increments are Normal(0, step_volatility^2); independently, with
    probability ``jump_rate`` per step the value is multiplied by
    exp(+-jump_scale), sign drawn from the same stream.
    """
    if length < 1:
        raise ValueError(f"series length must be >= 1, got {length}")
    increments = rng.normal(0.0, step_volatility, size=length - 1)
    if jump_rate > 0.0:
        jump_mask = rng.random(length - 1) < jump_rate
        jump_sign = np.where(rng.random(length - 1) < 0.5, 1.0, -1.0)
        increments = increments + jump_mask * jump_sign * jump_scale
    log_path = np.concatenate(([0.0], np.cumsum(increments)))
    return FundamentalSeries(
        values=start * np.exp(log_path),
        step_volatility=step_volatility,
        jump_rate=jump_rate,
        jump_scale=jump_scale,
    )


def agent_fundamental_estimate(
    lens: AgentFundamentalLens,
    series: FundamentalSeries,
    t: int,
    rng: np.random.Generator,
) -> float:
    """The agent's private valuation of the stock at step ``t``.

    One observation-noise draw is consumed per call, including when the
    noise scale is zero, so an agent's draw sequence does not depend on
    configuration values.
    """
    eta = rng.normal(0.0, 1.0) * lens.observation_noise_scale
    return float(series.values[t]) * lens.multiplicative_bias * math.exp(eta)
