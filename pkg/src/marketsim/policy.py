"""Tabular model-free reinforcement learning used by both trader algorithms.

A policy is a table of per-(state, action) value estimates. Action
probabilities are a softmax of the value row at a fixed temperature, and
each realized reward moves the visited entry toward the reward by an
exponential-recency step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# State/action space sizes for the two trader algorithms.
N_FORECAST_STATES = 27
N_FORECAST_ACTIONS = 27
N_TRADE_STATES = 108
N_TRADE_ACTIONS = 9

# Trading action a0 codes (long-only: "short" sells held shares).
SELL, HOLD, BUY = 0, 1, 2


class NonFiniteRewardError(ValueError):
    """Raised when an update is attempted with a NaN or infinite reward."""


@dataclass(frozen=True, slots=True)
class ForecastState:
    """(long-term volatility, short-term volatility, valuation gap), each in {0,1,2}."""

    s0: int
    s1: int
    s2: int

    @property
    def index(self) -> int:
        return (self.s0 * 3 + self.s1) * 3 + self.s2

    @classmethod
    def from_index(cls, i: int) -> "ForecastState":
        return cls(i // 9, (i // 3) % 3, i % 3)


@dataclass(frozen=True, slots=True)
class ForecastAction:
    """(forecast type, lag-window size, reflexivity weight), each in {0,1,2}."""

    a0: int
    a1: int
    a2: int

    @property
    def index(self) -> int:
        return (self.a0 * 3 + self.a1) * 3 + self.a2

    @classmethod
    def from_index(cls, i: int) -> "ForecastAction":
        return cls(i // 9, (i // 3) % 3, i % 3)


@dataclass(frozen=True, slots=True)
class TradeState:
    """Trading state: forecast trend, volatility, cash level, holdings level, liquidity.

    s0, s1, s4 are ternary; s2 and s3 are binary (below / at-or-above the
    initial portfolio snapshot).
    """

    s0: int
    s1: int
    s2: int
    s3: int
    s4: int

    @property
    def index(self) -> int:
        return (((self.s0 * 3 + self.s1) * 2 + self.s2) * 2 + self.s3) * 3 + self.s4

    @classmethod
    def from_index(cls, i: int) -> "TradeState":
        s4 = i % 3
        i //= 3
        s3 = i % 2
        i //= 2
        s2 = i % 2
        i //= 2
        return cls(i // 3, i % 3, s2, s3, s4)


@dataclass(frozen=True, slots=True)
class TradeAction:
    """(order side: sell/hold/buy, gesture stance: lose/neutral/gain)."""

    a0: int
    a1: int

    @property
    def index(self) -> int:
        return self.a0 * 3 + self.a1

    @classmethod
    def from_index(cls, i: int) -> "TradeAction":
        return cls(i // 3, i % 3)


class TabularPolicy:
    """Per-(state, action) value table with softmax action probabilities.

    ``values[s, a]`` estimates the reward of action ``a`` in state ``s``;
    probabilities are proportional to ``exp(values[s, a] / temperature)``.
    Visit counts track how often each pair was selected.
    """

    def __init__(
        self,
        n_states: int,
        n_actions: int,
        learning_rate: float = 0.1,
        temperature: float = 0.2,
    ) -> None:
        if not 0.0 < learning_rate <= 1.0:
            raise ValueError(f"learning_rate must be in (0, 1], got {learning_rate}")
        if temperature <= 0.0:
            raise ValueError(f"temperature must be positive, got {temperature}")
        self.n_states = n_states
        self.n_actions = n_actions
        self.learning_rate = learning_rate
        self.temperature = temperature
        self.values = np.zeros((n_states, n_actions))
        self.visit_counts = np.zeros((n_states, n_actions), dtype=np.int64)

    def _check_state(self, state: int) -> None:
        if not 0 <= state < self.n_states:
            raise IndexError(f"state index {state} out of range [0, {self.n_states})")

    def action_probabilities(self, state: int) -> np.ndarray:
        self._check_state(state)
        row = self.values[state]
        z = np.exp((row - row.max()) / self.temperature)
        return z / z.sum()

    def select_action(self, state: int, rng: np.random.Generator) -> int:
        """Sample one action by inverse CDF on a single uniform draw."""
        probs = self.action_probabilities(state)
        u = rng.random()
        acc = 0.0
        action = self.n_actions - 1
        for a in range(self.n_actions):
            acc += probs[a]
            if u < acc:
                action = a
                break
        self.visit_counts[state, action] += 1
        return action

    def update(self, state: int, action: int, reward: float) -> None:
        """Move values[state, action] toward the reward by one learning step."""
        self._check_state(state)
        if not 0 <= action < self.n_actions:
            raise IndexError(f"action index {action} out of range [0, {self.n_actions})")
        if not np.isfinite(reward):
            raise NonFiniteRewardError(f"reward must be finite, got {reward}")
        self.values[state, action] += self.learning_rate * (reward - self.values[state, action])

    def rows(self):
        """Yield (state, action, value, visits) for every table entry."""
        for s in range(self.n_states):
            for a in range(self.n_actions):
                yield s, a, float(self.values[s, a]), int(self.visit_counts[s, a])


def forecast_policy(learning_rate: float = 0.1, temperature: float = 0.2) -> TabularPolicy:
    return TabularPolicy(N_FORECAST_STATES, N_FORECAST_ACTIONS, learning_rate, temperature)


def trade_policy(learning_rate: float = 0.1, temperature: float = 0.2) -> TabularPolicy:
    return TabularPolicy(N_TRADE_STATES, N_TRADE_ACTIONS, learning_rate, temperature)
