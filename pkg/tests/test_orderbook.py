import numpy as np
import pytest

from marketsim import ClearingResult, Order, Side, clear_auction

from reference_clearing import clear_by_unit_expansion


def bid(price, qty, agent=0):
    return Order(agent_id=agent, stock_id=0, side=Side.BID, quantity=qty, limit_price=price)


def ask(price, qty, agent=100):
    return Order(agent_id=agent, stock_id=0, side=Side.ASK, quantity=qty, limit_price=price)


def test_symmetric_single_match():
    result = clear_auction([bid(100, 10)], [ask(100, 10)], prev_price=95)
    assert len(result.trades) == 1
    assert result.trades[0].quantity == 10
    assert result.trades[0].price == 100
    assert result.market_price == 100
    assert result.volume == 10
    assert result.spread == 0


def test_level_rule_with_residual_carry():
    bids = [bid(101, 10, agent=1), bid(100, 5, agent=2), bid(99, 20, agent=3)]
    asks = [ask(98, 8, agent=4), ask(100, 5, agent=5), ask(102, 7, agent=6)]
    result = clear_auction(bids, asks, prev_price=97)
    got = [(t.buyer_id, t.seller_id, t.quantity, t.price) for t in result.trades]
    assert got == [(1, 4, 8, 99.5), (1, 5, 2, 100.5), (2, 5, 3, 100.0)]
    assert result.market_price == 100.0
    assert result.volume == 13
    assert result.spread == abs((101 + 100 + 99) / 3 - (98 + 100 + 102) / 3)
    assert result.spread == 0


def test_uncrossed_book():
    result = clear_auction([bid(99, 5)], [ask(101, 5)], prev_price=100)
    assert result.trades == []
    assert result.market_price == 100
    assert result.volume == 0
    assert result.spread == 2


def test_empty_book_carries_price_and_spread():
    result = clear_auction([], [], prev_price=87.5)
    assert result.trades == []
    assert result.market_price == 87.5
    assert result.volume == 0
    assert result.spread is None


def test_one_sided_book_flags_spread_carry():
    result = clear_auction([bid(100, 1)], [], prev_price=90)
    assert result.trades == []
    assert result.market_price == 90
    assert result.spread is None


def test_order_validation():
    with pytest.raises(ValueError):
        Order(agent_id=0, stock_id=0, side=Side.BID, quantity=0, limit_price=100)
    with pytest.raises(ValueError):
        Order(agent_id=0, stock_id=0, side=Side.ASK, quantity=1, limit_price=-5)
    with pytest.raises(ValueError):
        Order(agent_id=0, stock_id=0, side=Side.ASK, quantity=1, limit_price=float("nan"))


def test_fifo_tie_breaking():
    asks = [ask(100, 3, agent=7), ask(100, 3, agent=8)]
    result = clear_auction([bid(100, 4, agent=1)], asks, prev_price=100)
    got = [(t.seller_id, t.quantity) for t in result.trades]
    assert got == [(7, 3), (8, 1)]


def test_determinism():
    bids = [bid(101, 2, agent=1), bid(100, 3, agent=2)]
    asks = [ask(99, 4, agent=3)]
    a = clear_auction(bids, asks, prev_price=100)
    b = clear_auction(bids, asks, prev_price=100)
    assert a == b


def random_book(rng):
    bids, asks = [], []
    agent = 0
    for _ in range(rng.integers(0, 9)):
        bids.append(bid(int(rng.integers(90, 111)), int(rng.integers(1, 6)), agent))
        agent += 1
    for _ in range(rng.integers(0, 9)):
        asks.append(ask(int(rng.integers(90, 111)), int(rng.integers(1, 6)), agent))
        agent += 1
    return bids, asks


def assert_matches_reference(bids, asks, prev_price=100.0):
    result = clear_auction(bids, asks, prev_price)
    ref_trades, ref_price, ref_volume, left_bids, left_asks = clear_by_unit_expansion(
        bids, asks, prev_price
    )
    got = [(t.buyer_id, t.seller_id, t.quantity, t.price) for t in result.trades]
    assert got == ref_trades
    assert result.market_price == ref_price
    assert result.volume == ref_volume
    # monotone halt: the surviving book must be uncrossed
    if left_bids and left_asks:
        assert max(o.limit_price for o in left_bids) < min(o.limit_price for o in left_asks)
    return result


def test_random_books_match_reference():
    rng = np.random.default_rng(1234)
    for _ in range(1000):
        bids, asks = random_book(rng)
        result = assert_matches_reference(bids, asks)
        for trade in result.trades:
            # every execution stays inside its originating limits
            bid_limit = next(o.limit_price for o in bids if o.agent_id == trade.buyer_id)
            ask_limit = next(o.limit_price for o in asks if o.agent_id == trade.seller_id)
            assert ask_limit <= trade.price <= bid_limit
        assert result.volume == sum(t.quantity for t in result.trades)
