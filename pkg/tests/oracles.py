"""Independent reference implementations the engine is checked against.

Everything here is deliberately naive: plain dicts, explicit loops, no reuse
of engine code beyond shared arithmetic definitions.
"""

from __future__ import annotations

from datetime import date, timedelta

import numpy as np


def step_backtest(
    posts: dict[date, float],
    price: dict[date, float],
    start: date,
    end: date,
    k: int,
    fee: float,
    cash: float,
):
    """Day-by-day hand simulation of the all-in/all-out post-trend rule."""
    qty = 0.0
    rows = []
    d = start
    while d <= end:
        close = price[d]
        now = posts[d - timedelta(days=k)]
        before = posts[d - timedelta(days=k + 1)]
        if now > before:
            sig = "buy"
        elif now < before:
            sig = "sell"
        else:
            sig = "hold"
        executed = False
        if sig == "buy" and cash > 0:
            qty = qty + cash * (1.0 - fee) / close
            cash = 0.0
            executed = True
        elif sig == "sell" and qty > 0:
            cash = cash + qty * close * (1.0 - fee)
            qty = 0.0
            executed = True
        rows.append((d, sig, executed, cash, qty, cash + qty * close))
        d += timedelta(days=1)
    final = cash + qty * price[end]
    return rows, final


def _seg_cost_table(values):
    px = [0.0]
    px2 = [0.0]
    for v in values:
        px.append(px[-1] + v)
        px2.append(px2[-1] + v * v)

    def cost(a: int, b: int) -> float:
        s = px[b] - px[a]
        s2 = px2[b] - px2[a]
        return s2 - s * s / (b - a)

    return cost


def exhaustive_min_cost(values, penalty: float, min_size: int = 2) -> float:
    """Minimum penalized cost over every admissible segmentation, by enumeration."""
    n = len(values)
    cost = _seg_cost_table(values)
    best = float("inf")

    def rec(start: int, acc: float, n_breaks: int) -> None:
        nonlocal best
        for seg_end in range(start + min_size, n + 1):
            c = acc + cost(start, seg_end)
            if seg_end == n:
                total = c + penalty * n_breaks
                if total < best:
                    best = total
            else:
                rec(seg_end, c, n_breaks + 1)

    rec(0, 0.0, 0)
    return best


def bellman_dp(values, penalty: float, min_size: int = 2):
    """Unpruned optimal-partitioning dynamic program; returns (total_cost, breakpoints)."""
    n = len(values)
    cost = _seg_cost_table(values)
    inf = float("inf")
    f = [inf] * (n + 1)
    f[0] = -penalty
    prev = [0] * (n + 1)
    for t in range(min_size, n + 1):
        best = inf
        arg = 0
        for tau in [0] + list(range(min_size, t - min_size + 1)):
            c = f[tau] + cost(tau, t) + penalty
            if c < best:
                best = c
                arg = tau
        f[t] = best
        prev[t] = arg
    breaks = []
    t = n
    while t > 0:
        tau = prev[t]
        if tau > 0:
            breaks.append(tau)
        t = tau
    breaks.reverse()
    return f[n], tuple(breaks)


def pearson_slow(a, b) -> float:
    """Textbook Pearson coefficient, for spot-checking the lag scanner."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    am = a - a.mean()
    bm = b - b.mean()
    return float((am * bm).sum() / np.sqrt((am * am).sum() * (bm * bm).sum()))
