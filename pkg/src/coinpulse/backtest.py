"""All-in/all-out post-trend trading simulation against daily closes."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta
from typing import Sequence

from coinpulse.signal import DailySeries

BUY = "buy"
SELL = "sell"
HOLD = "hold"


class NoSignal(Exception):
    """Posting history does not reach far enough back to read a trend."""


class MissingBar(Exception):
    """Price series does not cover the trading window."""


class InsufficientHistory(Exception):
    """Lookback k reaches beyond the available posting series."""


class EmptyPortfolio(Exception):
    """Summary requested over zero ledgers."""


@dataclass(frozen=True)
class StrategyConfig:
    """Signal lookback, fee, stake, and trading window for one currency run.

    ``k`` is the number of days between the post count being compared and the
    trading day; it is derived from a lead-lag analysis as max(0, -best_lag),
    so a price-leading (positive) lag collapses to same-day counts.
    """

    start_date: date
    end_date: date
    k: int = 0
    fee_rate: float = 0.001
    initial_cash: float = 1_000_000.0

    def __post_init__(self) -> None:
        if self.start_date >= self.end_date:
            raise ValueError("start_date must precede end_date")
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if not 0.0 <= self.fee_rate < 1.0:
            raise ValueError(f"fee_rate outside [0,1): {self.fee_rate}")
        if self.initial_cash <= 0:
            raise ValueError("initial_cash must be positive")


@dataclass(frozen=True)
class LedgerDay:
    date: date
    signal: str
    executed: bool
    cash: float
    quantity: float
    portfolio_value: float


@dataclass(frozen=True)
class BacktestLedger:
    currency: str
    initial_cash: float
    days: tuple[LedgerDay, ...]
    final_value: float
    return_pct: float


def signal_for_day(posts: DailySeries, day: date, k: int) -> str:
    """Trend read k days back: count above the day before means buy, below means sell."""
    if k < 0:
        raise ValueError("k must be >= 0")
    ref = day - timedelta(days=k)
    prev = ref - timedelta(days=1)
    if posts.index_of(ref) is None or posts.index_of(prev) is None:
        raise NoSignal(f"posts series does not cover {prev}..{ref}")
    current = posts.value_on(ref)
    before = posts.value_on(prev)
    if current > before:
        return BUY
    if current < before:
        return SELL
    return HOLD


def run_backtest(posts: DailySeries, price: DailySeries, cfg: StrategyConfig) -> BacktestLedger:
    """Daily simulation: buys commit all cash, sells liquidate everything.

    Fees shave both sides of a trade; the final value marks remaining
    holdings to the last close without a liquidation fee. Repeated same-side
    signals are silent no-ops, so positions never compound.
    """
    if not price.covers(cfg.start_date, cfg.end_date):
        raise MissingBar(
            f"{price.label or 'price'}: window {cfg.start_date}..{cfg.end_date} not covered"
        )
    hist_start = cfg.start_date - timedelta(days=cfg.k + 1)
    hist_end = cfg.end_date - timedelta(days=cfg.k)
    if not posts.covers(hist_start, hist_end):
        raise InsufficientHistory(
            f"k={cfg.k} needs posts over {hist_start}..{hist_end}"
        )

    cash = cfg.initial_cash
    quantity = 0.0
    days: list[LedgerDay] = []
    d = cfg.start_date
    while d <= cfg.end_date:
        close = price.value_on(d)
        sig = signal_for_day(posts, d, cfg.k)
        executed = False
        if sig == BUY and cash > 0:
            quantity += cash * (1.0 - cfg.fee_rate) / close
            cash = 0.0
            executed = True
        elif sig == SELL and quantity > 0:
            cash += quantity * close * (1.0 - cfg.fee_rate)
            quantity = 0.0
            executed = True
        value = cash + quantity * close
        days.append(
            LedgerDay(
                date=d,
                signal=sig,
                executed=executed,
                cash=cash,
                quantity=quantity,
                portfolio_value=value,
            )
        )
        d += timedelta(days=1)

    final_value = days[-1].portfolio_value
    return BacktestLedger(
        currency=price.label,
        initial_cash=cfg.initial_cash,
        days=tuple(days),
        final_value=final_value,
        return_pct=return_pct(final_value, cfg.initial_cash),
    )


def return_pct(final_value: float, initial_cash: float) -> float:
    """Percent return on the initial stake (reports render it to 2 decimals)."""
    if initial_cash <= 0:
        raise ValueError("initial_cash must be positive")
    return (final_value - initial_cash) / initial_cash * 100.0


def derive_k(best_lag: int) -> int:
    """Lookback from a lead-lag estimate: only a posts-leading (negative) lag shifts the signal."""
    return max(0, -best_lag)


def portfolio_summary(ledgers: Sequence[BacktestLedger]) -> dict[str, float]:
    """Total final value and percent return over the summed stakes."""
    if not ledgers:
        raise EmptyPortfolio("no ledgers to summarize")
    total_final = sum(l.final_value for l in ledgers)
    total_initial = sum(l.initial_cash for l in ledgers)
    return {
        "total_final": total_final,
        "total_return_pct": return_pct(total_final, total_initial),
    }
