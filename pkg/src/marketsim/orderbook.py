"""Batch double-auction clearing for one stock at one time step.

All orders for a step are collected and cleared at once: bids sorted
descending, asks ascending, matched level by level at the midpoint of the
two limit prices until the book no longer crosses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum


class Side(Enum):
    BID = "bid"
    ASK = "ask"


@dataclass(frozen=True, slots=True)
class Order:
    """A limit order for a fixed quantity of one stock."""

    agent_id: int
    stock_id: int
    side: Side
    quantity: int
    limit_price: float

    def __post_init__(self) -> None:
        if self.quantity < 1:
            raise ValueError(f"order quantity must be >= 1, got {self.quantity}")
        if not (math.isfinite(self.limit_price) and self.limit_price > 0):
            raise ValueError(f"order limit price must be positive and finite, got {self.limit_price}")


@dataclass(frozen=True, slots=True)
class Trade:
    """An executed match between one bid and one ask."""

    buyer_id: int
    seller_id: int
    quantity: int
    price: float


@dataclass(slots=True)
class ClearingResult:
    """Outcome of one batch auction.

    ``spread`` is the absolute difference between the mean bid limit and the
    mean ask limit over all submitted orders; it is None when either side of
    the book was empty, in which case the caller carries the previous step's
    spread forward.
    """

    trades: list[Trade] = field(default_factory=list)
    market_price: float = 0.0
    volume: int = 0
    spread: float | None = None


def clear_auction(bids: list[Order], asks: list[Order], prev_price: float) -> ClearingResult:
    """Clear one step's batch of orders.

    Bids are sorted by descending limit price and asks by ascending limit
    price (ties keep submission order). The top bid and top ask are matched
    while the bid limit is at or above the ask limit; each match trades the
    smaller residual quantity at the mid of the two limits, and the order
    with quantity left over stays at the head for the next match. The market
    price is the price of the final trade, or ``prev_price`` if nothing
    crossed.
    """
    sorted_bids = sorted(bids, key=lambda o: -o.limit_price)
    sorted_asks = sorted(asks, key=lambda o: o.limit_price)

    trades: list[Trade] = []
    volume = 0
    bi = ai = 0
    bid_left = sorted_bids[0].quantity if sorted_bids else 0
    ask_left = sorted_asks[0].quantity if sorted_asks else 0
    while bi < len(sorted_bids) and ai < len(sorted_asks):
        bid = sorted_bids[bi]
        ask = sorted_asks[ai]
        if bid.limit_price < ask.limit_price:
            break
        qty = bid_left if bid_left < ask_left else ask_left
        trades.append(
            Trade(
                buyer_id=bid.agent_id,
                seller_id=ask.agent_id,
                quantity=qty,
                price=(bid.limit_price + ask.limit_price) / 2.0,
            )
        )
        volume += qty
        bid_left -= qty
        ask_left -= qty
        if bid_left == 0:
            bi += 1
            if bi < len(sorted_bids):
                bid_left = sorted_bids[bi].quantity
        if ask_left == 0:
            ai += 1
            if ai < len(sorted_asks):
                ask_left = sorted_asks[ai].quantity

    if bids and asks:
        mean_bid = sum(o.limit_price for o in bids) / len(bids)
        mean_ask = sum(o.limit_price for o in asks) / len(asks)
        spread = abs(mean_bid - mean_ask)
    else:
        spread = None

    price = trades[-1].price if trades else prev_price
    return ClearingResult(trades=trades, market_price=price, volume=volume, spread=spread)
