import math

import numpy as np
import pytest

from marketsim import (
    AgentFundamentalLens,
    agent_fundamental_estimate,
    generate_fundamental_series,
)


def test_degenerate_walk_is_constant():
    series = generate_fundamental_series(50, np.random.default_rng(0), step_volatility=0.0)
    assert np.all(series.values == 100.0)


def test_same_seed_same_series():
    a = generate_fundamental_series(200, np.random.default_rng(9), jump_rate=0.01)
    b = generate_fundamental_series(200, np.random.default_rng(9), jump_rate=0.01)
    assert np.array_equal(a.values, b.values)


def test_increment_std_matches_sigma():
    series = generate_fundamental_series(100_001, np.random.default_rng(3), step_volatility=0.01)
    increments = np.diff(np.log(series.values))
    assert abs(increments.std() - 0.01) < 0.0005


def test_increments_uncorrelated():
    series = generate_fundamental_series(100_001, np.random.default_rng(4), step_volatility=0.01)
    x = np.diff(np.log(series.values))
    x = x - x.mean()
    lag1 = float(np.dot(x[:-1], x[1:]) / np.dot(x, x))
    assert abs(lag1) < 3.0 / math.sqrt(len(x))


def test_values_positive_and_finite():
    series = generate_fundamental_series(
        5000, np.random.default_rng(5), step_volatility=0.02, jump_rate=0.05, jump_scale=0.1
    )
    assert np.all(series.values > 0)
    assert np.all(np.isfinite(series.values))


def test_jumps_add_scale_to_increments():
    rng = np.random.default_rng(6)
    series = generate_fundamental_series(
        20_001, rng, step_volatility=0.001, jump_rate=0.5, jump_scale=0.2
    )
    increments = np.abs(np.diff(np.log(series.values)))
    jumped = (increments > 0.1).mean()
    assert 0.4 < jumped < 0.6


def test_length_validation():
    with pytest.raises(ValueError):
        generate_fundamental_series(0, np.random.default_rng(0))


def test_transparent_lens():
    series = generate_fundamental_series(10, np.random.default_rng(1))
    lens = AgentFundamentalLens(multiplicative_bias=1.0, observation_noise_scale=0.0)
    t = 7
    assert agent_fundamental_estimate(lens, series, t, np.random.default_rng(0)) == series.values[t]


def test_biased_lens_arithmetic():
    series = generate_fundamental_series(5, np.random.default_rng(1), step_volatility=0.0)
    lens = AgentFundamentalLens(multiplicative_bias=1.1, observation_noise_scale=0.0)
    estimate = agent_fundamental_estimate(lens, series, 2, np.random.default_rng(0))
    assert abs(estimate - 110.0) < 1e-9


def test_lognormal_estimate_mean():
    series = generate_fundamental_series(5, np.random.default_rng(2), step_volatility=0.0)
    lens = AgentFundamentalLens(multiplicative_bias=1.3, observation_noise_scale=0.01)
    rng = np.random.default_rng(8)
    draws = [agent_fundamental_estimate(lens, series, 1, rng) for _ in range(10_000)]
    expected = 100.0 * 1.3 * math.exp(0.5 * 0.01**2)
    assert abs(np.mean(draws) - expected) / expected < 0.01


def test_estimate_ratio_stationary():
    # the agent's valuation stays pinned to the fundamental path at all times
    series = generate_fundamental_series(2001, np.random.default_rng(12), step_volatility=0.02)
    lens = AgentFundamentalLens(multiplicative_bias=0.9, observation_noise_scale=0.01)
    rng = np.random.default_rng(13)
    ratios = np.array(
        [agent_fundamental_estimate(lens, series, t, rng) / series.values[t] for t in range(2000)]
    )
    early = ratios[:1000].mean()
    late = ratios[1000:].mean()
    assert abs(early - 0.9) < 0.01
    assert abs(late - 0.9) < 0.01


def test_estimate_consumes_draw_even_without_noise():
    # draw-count parity: a noise-free lens must advance the stream identically
    series = generate_fundamental_series(5, np.random.default_rng(1))
    silent = AgentFundamentalLens(multiplicative_bias=1.0, observation_noise_scale=0.0)
    rng_a = np.random.default_rng(99)
    agent_fundamental_estimate(silent, series, 0, rng_a)
    rng_b = np.random.default_rng(99)
    rng_b.normal(0.0, 1.0)
    assert rng_a.random() == rng_b.random()


def test_lens_validation():
    with pytest.raises(ValueError):
        AgentFundamentalLens(multiplicative_bias=0.0, observation_noise_scale=0.01)
    with pytest.raises(ValueError):
        AgentFundamentalLens(multiplicative_bias=float("inf"), observation_noise_scale=0.0)
