"""Acceptance suite: one test per release criterion (P1..P10).

Directional criteria run three full desk-scale sweeps (one per bias kind)
off a single module fixture; everything else is exact or statistical at
stated tolerances.
"""

import json
import math
import subprocess
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import pytest

from marketsim import Order, Side, clear_auction
from marketsim.cli import write_run_outputs
from marketsim.config import SimConfig
from marketsim.engine import run_sweep
from marketsim.policy import TabularPolicy
from marketsim.stats import (
    bankruptcy_rate,
    count_crashes,
    excess_kurtosis,
    gesture_by_performance_decile,
    log_returns,
    mean_abs_log_return,
    rolling_volatility,
    run_length_distribution,
)
from reference_clearing import clear_by_unit_expansion

ACCEPT_SEED = 6
P_GRID = [0.0, 50.0, 100.0]
BIASES = ("delay_discounting", "fear", "greed")


@pytest.fixture(scope="module")
def sweeps():
    """One desk-scale sweep per bias kind, shared by the directional tests."""
    config = SimConfig(seed=ACCEPT_SEED)
    return {bias: run_sweep(replace(config, bias=bias), P_GRID) for bias in BIASES}


def cell_means(sweep, metric: str) -> list[float]:
    return [sweep.aggregates[p].flat_dict()[metric] for p in sweep.p_grid]


def trend(values, sign: int, strict: bool = True) -> bool:
    pairs = zip(values, values[1:])
    if strict:
        return all((b - a) * sign > 0 for a, b in pairs)
    return all((b - a) * sign >= 0 for a, b in pairs)


# -- P1 ------------------------------------------------------------------------


def test_p1_run_twice_byte_identical(tmp_path):
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "marketsim.cli", "run", "--seed", "42",
             "--out-dir", str(out)],
            capture_output=True, text=True, cwd=tmp_path,
        )
        assert proc.returncode == 0, proc.stderr
        files = sorted(p for p in out.rglob("*") if p.is_file())
        assert files, "run produced no artifacts"
        outputs.append({p.relative_to(out): p.read_bytes() for p in files})
    assert outputs[0].keys() == outputs[1].keys()
    for rel, data in outputs[0].items():
        assert data == outputs[1][rel], f"{rel} differs between identical runs"


# -- P2 ------------------------------------------------------------------------


def test_p2_conservation_audit(sweeps):
    run = sweeps["delay_discounting"].cells[0.0][0]
    config = run.config
    for j in range(config.stocks):
        shares = run.total_shares[j]
        assert (shares == shares[0]).all(), "total shares drifted"
    cash = run.total_cash
    accrued = cash[:-1] * config.risk_free_rate
    errors = np.abs(np.diff(cash) - accrued)
    assert errors.max() <= 1e-6, f"cash drift {errors.max():.3e} at step {errors.argmax() + 1}"


# -- P3 ------------------------------------------------------------------------


def random_book(rng):
    def orders(side, count, base_id):
        return [
            Order(
                agent_id=base_id + i,
                stock_id=0,
                side=side,
                quantity=int(rng.integers(1, 6)),
                limit_price=float(rng.integers(90, 111)),
            )
            for i in range(count)
        ]

    bids = orders(Side.BID, int(rng.integers(0, 9)), 0)
    asks = orders(Side.ASK, int(rng.integers(0, 9)), 100)
    return bids, asks, float(rng.integers(90, 111))


def test_p3_clearing_matches_brute_force_oracle():
    rng = np.random.default_rng(20260819)
    for _ in range(10_000):
        bids, asks, prev = random_book(rng)
        result = clear_auction(list(bids), list(asks), prev)
        ref_trades, ref_price, ref_volume, _, _ = clear_by_unit_expansion(
            list(bids), list(asks), prev
        )
        got = sorted((t.buyer_id, t.seller_id, t.quantity, t.price) for t in result.trades)
        assert got == sorted(ref_trades)
        assert result.market_price == ref_price
        assert result.volume == ref_volume


# -- P4 ------------------------------------------------------------------------


def learning_thirds(run) -> tuple[float, float]:
    learning = run.config.learning_steps
    third = learning // 3
    total = run.forecast_reward_sum[1:learning + 1]
    count = run.forecast_reward_count[1:learning + 1]
    first = total[:third].sum() / max(count[:third].sum(), 1)
    last = total[-third:].sum() / max(count[-third:].sum(), 1)
    return first, last


def test_p4_forecast_reward_improves(sweeps):
    runs = sweeps["delay_discounting"].cells[0.0]
    improved = sum(last >= first for first, last in map(learning_thirds, runs))
    assert improved >= 4, f"forecast reward improved in only {improved} of {len(runs)} runs"


# -- P5..P7 ---------------------------------------------------------------------


def test_p5_delay_discounting_directions(sweeps):
    sweep = sweeps["delay_discounting"]
    checks = [
        ("mean_volume strictly increasing", cell_means(sweep, "mean_volume"), +1, True),
        ("mean_abs_log_return strictly decreasing", cell_means(sweep, "mean_abs_log_return"), -1, True),
        ("mean_spread_pct strictly decreasing", cell_means(sweep, "mean_spread_pct"), -1, True),
        ("week-lag volatility non-increasing", cell_means(sweep, "volatility_5"), -1, False),
        ("six-month-lag volatility non-decreasing", cell_means(sweep, "volatility_126"), +1, False),
    ]
    failures = [
        f"{label}: {[round(v, 5) for v in values]}"
        for label, values, sign, strict in checks
        if not trend(values, sign, strict)
    ]
    assert not failures, "; ".join(failures)


def test_p6_fear_directions(sweeps):
    sweep = sweeps["fear"]
    crashes = cell_means(sweep, "crash_count")
    spread = cell_means(sweep, "mean_spread_pct")
    assert trend(crashes, +1), f"crash_count not strictly increasing: {crashes}"
    assert trend(spread, +1), f"mean_spread_pct not strictly increasing: {spread}"


def test_p7_greed_directions(sweeps):
    sweep = sweeps["greed"]
    checks = [(f"volatility_{lag}", cell_means(sweep, f"volatility_{lag}")) for lag in (5, 21, 126)]
    checks += [("crash_count", cell_means(sweep, "crash_count")),
               ("mean_spread_pct", cell_means(sweep, "mean_spread_pct"))]
    failures = [
        f"{label} not strictly decreasing: {[round(v, 5) for v in values]}"
        for label, values in checks
        if not trend(values, -1)
    ]
    rates = cell_means(sweep, "bankruptcy_rate")
    if rates[-1] > rates[0]:
        failures.append(f"bankruptcy_rate rose from {rates[0]} to {rates[-1]}")
    assert not failures, "; ".join(failures)


# -- P8 ------------------------------------------------------------------------


def test_p8_fat_tails(sweeps):
    runs = sweeps["delay_discounting"].cells[0.0]
    fat = 0
    for run in runs:
        returns = np.diff(np.log(run.measured_prices()))
        fat += excess_kurtosis(returns) > 0
    assert fat >= 4, f"positive excess kurtosis in only {fat} of {len(runs)} runs"


# -- P9 ------------------------------------------------------------------------


def test_p9_bias_identity_at_p0(sweeps, tmp_path):
    written = {}
    for bias in BIASES:
        sweep = sweeps[bias]
        cell_dir = tmp_path / bias
        for run, report in zip(sweep.cells[0.0], sweep.reports[0.0]):
            write_run_outputs(run, cell_dir / str(run.run_index), report)
        files = sorted(p for p in cell_dir.rglob("*") if p.is_file())
        written[bias] = {p.relative_to(cell_dir): p.read_bytes() for p in files}
    base = written[BIASES[0]]
    assert len(base) == len(sweeps[BIASES[0]].cells[0.0]) * 3
    for bias in BIASES[1:]:
        assert written[bias].keys() == base.keys()
        for rel, data in base.items():
            assert written[bias][rel] == data, f"{bias} p=0 artifact {rel} differs"


# -- P10 -----------------------------------------------------------------------


@dataclass
class AgentRow:
    agent_id: int
    g: float
    final_nav: float
    bankrupt: bool = False


class FixedRng:
    def __init__(self, draws):
        self.draws = list(draws)

    def random(self):
        return self.draws.pop(0)


def close(a, b, tol=1e-9):
    return math.isclose(a, b, rel_tol=0, abs_tol=tol)


def test_p10_metric_examples():
    ln11 = math.log(1.1)

    # return and volatility metrics
    assert close(log_returns([100, 110])[0], ln11)
    assert not log_returns([7.0] * 10).any()
    assert close(log_returns([100, 50])[0], math.log(0.5))
    assert mean_abs_log_return([3.0] * 8) == 0.0
    assert close(mean_abs_log_return([100, 110, 100]), ln11)
    assert close(mean_abs_log_return([100, 120]), math.log(1.2))
    assert not rolling_volatility([5.0] * 9, 3).any()
    assert close(rolling_volatility([90, 110], 2)[0], 10 / 110)
    series = [100, 104, 99, 107, 101, 96]
    doubled = rolling_volatility([2 * x for x in series], 3)
    assert np.allclose(doubled, rolling_volatility(series, 3), rtol=0, atol=1e-9)

    # crash and run-length metrics
    assert count_crashes([100, 79]) == 1
    assert count_crashes([100, 85, 90]) == 0
    assert count_crashes([100, 79, 100, 130, 103]) == 2
    assert run_length_distribution([1, 2, 3, 2, 1, 1]) == {2: 1, -2: 1}
    assert run_length_distribution([1, 2, 3, 4, 5, 6]) == {5: 1}
    assert run_length_distribution([4.0] * 6) == {}

    # population metrics
    flat = [AgentRow(i, 0.5, 1000.0 + i) for i in range(10)]
    assert gesture_by_performance_decile(flat) == (0.5, 0.5)
    ranked = [AgentRow(i, 0.2 + 0.05 * i, 1000.0 + 10 * i) for i in range(10)]
    assert gesture_by_performance_decile(ranked) == (0.65, 0.2)
    shuffled = [ranked[i] for i in (7, 2, 9, 0, 4, 1, 8, 3, 6, 5)]
    assert gesture_by_performance_decile(shuffled) == (0.65, 0.2)
    assert bankruptcy_rate([AgentRow(0, 0.5, 1.0)]) == 0.0
    assert bankruptcy_rate([AgentRow(0, 0.5, 1.0, bankrupt=True)]) == 1.0
    mixed = [AgentRow(i, 0.5, 1.0, bankrupt=i < 3) for i in range(10)]
    assert bankruptcy_rate(mixed) == 0.3

    # kurtosis: Monte-Carlo tolerance for the Gaussian, closed form otherwise
    gauss = np.random.default_rng(11).standard_normal(100_000)
    assert abs(excess_kurtosis(gauss)) < 0.1
    assert close(excess_kurtosis([1.0, -1.0] * 50), -2.0)
    with pytest.raises(ValueError):
        excess_kurtosis([2.0] * 100)

    # softmax policy
    policy = TabularPolicy(n_states=2, n_actions=3, learning_rate=0.1, temperature=0.2)
    assert np.allclose(policy.action_probabilities(0), [1 / 3] * 3, rtol=0, atol=1e-9)
    policy.values[0] = [1.0, 0.0, 0.0]
    policy.temperature = 1e-3
    assert policy.action_probabilities(0)[0] > 1 - 1e-9
    two = TabularPolicy(n_states=1, n_actions=2, learning_rate=0.1, temperature=1.0)
    two.values[0] = [1.0, 0.0]
    probs = two.action_probabilities(0)
    e = math.e
    assert close(probs[0], e / (e + 1)) and close(probs[1], 1 / (e + 1))

    # action selection
    uniform = TabularPolicy(n_states=1, n_actions=4, learning_rate=0.1, temperature=0.2)
    assert uniform.select_action(0, FixedRng([0.0])) == 0
    for draw in (0.0, 0.25, 0.5, 0.999999):
        assert policy.select_action(0, FixedRng([draw])) == 0
    one = TabularPolicy(n_states=8, n_actions=5, learning_rate=0.1, temperature=0.3)
    stream_a = np.random.default_rng(77)
    stream_b = np.random.default_rng(77)
    seq_a = [one.select_action(4, stream_a) for _ in range(100)]
    seq_b = [one.select_action(4, stream_b) for _ in range(100)]
    assert seq_a == seq_b

    # value updates
    learner = TabularPolicy(n_states=1, n_actions=2, learning_rate=0.1, temperature=0.2)
    learner.update(0, 0, 1.0)
    assert close(learner.values[0, 0], 0.1)
    learner.update(0, 0, learner.values[0, 0])
    assert close(learner.values[0, 0], 0.1)
    repeated = TabularPolicy(n_states=1, n_actions=1, learning_rate=0.1, temperature=0.2)
    for _ in range(3):
        repeated.update(0, 0, 1.0)
    assert close(repeated.values[0, 0], 0.271)
