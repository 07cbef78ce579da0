import random
from datetime import date, timedelta

import pytest

from coinpulse.backtest import (
    BUY,
    HOLD,
    SELL,
    EmptyPortfolio,
    InsufficientHistory,
    MissingBar,
    NoSignal,
    StrategyConfig,
    derive_k,
    portfolio_summary,
    return_pct,
    run_backtest,
    signal_for_day,
)
from coinpulse.signal import DailySeries
from oracles import step_backtest

START = date(2021, 1, 10)


def series(values, start=START, label="s"):
    return DailySeries(start_date=start, values=tuple(float(v) for v in values), label=label)


def random_fixture(rng: random.Random, n_days=None, k=None, fee=None):
    n_days = n_days if n_days is not None else rng.randrange(5, 61)
    k = k if k is not None else rng.randrange(0, 6)
    fee = fee if fee is not None else rng.choice([0.0, 0.001, 0.01])
    posts_start = START - timedelta(days=k + 1)
    posts = series(
        [rng.randrange(0, 6) for _ in range((START - posts_start).days + n_days)],
        start=posts_start,
        label="posts",
    )
    price = series(
        [round(rng.uniform(0.5, 50.0), 4) for _ in range(n_days)], start=START, label="price"
    )
    cfg = StrategyConfig(
        start_date=START,
        end_date=START + timedelta(days=n_days - 1),
        k=k,
        fee_rate=fee,
        initial_cash=1_000_000.0,
    )
    return posts, price, cfg


class TestSignalForDay:
    def test_increase_is_buy(self):
        posts = series([5, 7], start=date(2021, 1, 9))
        assert signal_for_day(posts, date(2021, 1, 10), k=0) == BUY

    def test_equal_is_hold(self):
        posts = series([3, 3], start=date(2021, 1, 4))
        assert signal_for_day(posts, date(2021, 1, 10), k=5) == HOLD

    def test_decrease_is_sell(self):
        posts = series([9, 2], start=date(2021, 1, 4))
        assert signal_for_day(posts, date(2021, 1, 10), k=5) == SELL

    def test_missing_history_raises(self):
        posts = series([1, 2, 3])
        with pytest.raises(NoSignal):
            signal_for_day(posts, START, k=1)

    def test_uses_only_old_information(self):
        rng = random.Random(21)
        for _ in range(50):
            k = rng.randrange(1, 6)
            base = [rng.randrange(0, 9) for _ in range(30)]
            day = START + timedelta(days=20)
            posts_a = series(base, start=START)
            cut = (day - START).days - k + 1  # first index the signal may not read
            perturbed = base[:cut] + [rng.randrange(0, 9) for _ in base[cut:]]
            posts_b = series(perturbed, start=START)
            assert signal_for_day(posts_a, day, k) == signal_for_day(posts_b, day, k)


class TestRunBacktest:
    def test_rising_posts_single_buy(self):
        n = 8
        posts = series(range(1, n + 2), start=START - timedelta(days=1))
        price = series([10, 12, 9, 14, 15, 11, 16, 18])
        cfg = StrategyConfig(
            start_date=START, end_date=START + timedelta(days=n - 1), k=0, fee_rate=0.001
        )
        ledger = run_backtest(posts, price, cfg)
        buys = [d for d in ledger.days if d.executed]
        assert len(buys) == 1 and buys[0].date == START
        assert all(d.signal == BUY for d in ledger.days)
        expected = cfg.initial_cash * (1.0 - cfg.fee_rate) * price.values[-1] / price.values[0]
        assert ledger.final_value == pytest.approx(expected, rel=1e-12)

    def test_constant_posts_never_trades(self):
        posts = series([4] * 15, start=START - timedelta(days=3))
        price = series([10, 11, 12, 13, 14, 15, 16, 17, 18, 19])
        cfg = StrategyConfig(start_date=START, end_date=START + timedelta(days=9), k=2)
        ledger = run_backtest(posts, price, cfg)
        assert all(d.signal == HOLD and not d.executed for d in ledger.days)
        assert ledger.final_value == cfg.initial_cash
        assert ledger.return_pct == 0.0

    def test_ten_day_fixture_matches_oracle(self):
        rng = random.Random(77)
        posts, price, cfg = random_fixture(rng, n_days=10)
        ledger = run_backtest(posts, price, cfg)
        rows, final = step_backtest(
            {d: posts.value_on(d) for d in posts.dates()},
            {d: price.value_on(d) for d in price.dates()},
            cfg.start_date,
            cfg.end_date,
            cfg.k,
            cfg.fee_rate,
            cfg.initial_cash,
        )
        assert ledger.final_value == final
        for day, row in zip(ledger.days, rows):
            assert (day.date, day.signal, day.executed, day.cash, day.quantity, day.portfolio_value) == row

    def test_replay_is_bit_identical(self):
        rng = random.Random(31)
        posts, price, cfg = random_fixture(rng)
        a = run_backtest(posts, price, cfg)
        b = run_backtest(posts, price, cfg)
        assert a == b

    def test_price_gap_raises(self):
        posts = series([1, 2, 3, 4, 5, 6], start=START - timedelta(days=1))
        price = series([10, 11, 12])
        cfg = StrategyConfig(start_date=START, end_date=START + timedelta(days=4), k=0)
        with pytest.raises(MissingBar):
            run_backtest(posts, price, cfg)

    def test_short_posts_history_raises(self):
        posts = series([1, 2, 3], start=START)  # nothing before the window
        price = series([10, 11, 12])
        cfg = StrategyConfig(start_date=START, end_date=START + timedelta(days=2), k=0)
        with pytest.raises(InsufficientHistory):
            run_backtest(posts, price, cfg)

    def test_ledger_accounting_identity(self):
        rng = random.Random(13)
        posts, price, cfg = random_fixture(rng, n_days=40)
        ledger = run_backtest(posts, price, cfg)
        for day in ledger.days:
            assert day.cash >= 0.0 and day.quantity >= 0.0
            close = price.value_on(day.date)
            assert day.portfolio_value == day.cash + day.quantity * close


class TestReturnPct:
    def test_published_rows(self):
        assert return_pct(31_916_439, 1_000_000) == pytest.approx(3091.64, abs=0.01)
        assert return_pct(17_983_091, 1_000_000) == pytest.approx(1698.31, abs=0.01)
        assert return_pct(110_514_693, 30_000_000) == pytest.approx(268.38, abs=0.01)

    def test_rejects_nonpositive_stake(self):
        with pytest.raises(ValueError):
            return_pct(1.0, 0.0)


class TestDeriveK:
    def test_negative_lag_becomes_lookback(self):
        assert derive_k(-11) == 11

    def test_positive_lag_collapses_to_zero(self):
        assert derive_k(1) == 0
        assert derive_k(0) == 0


class TestPortfolioSummary:
    def _ledger(self, initial, final):
        from coinpulse.backtest import BacktestLedger

        return BacktestLedger(
            currency="c",
            initial_cash=initial,
            days=(),
            final_value=final,
            return_pct=return_pct(final, initial),
        )

    def test_two_flat_ledgers(self):
        out = portfolio_summary([self._ledger(100.0, 100.0), self._ledger(100.0, 100.0)])
        assert out["total_return_pct"] == 0.0

    def test_mixed_returns(self):
        out = portfolio_summary([self._ledger(100.0, 200.0), self._ledger(100.0, 50.0)])
        assert out["total_return_pct"] == pytest.approx(25.0)

    def test_empty_rejected(self):
        with pytest.raises(EmptyPortfolio):
            portfolio_summary([])


class TestStrategyConfig:
    def test_window_must_be_ordered(self):
        with pytest.raises(ValueError):
            StrategyConfig(start_date=START, end_date=START)

    def test_fee_range(self):
        with pytest.raises(ValueError):
            StrategyConfig(start_date=START, end_date=START + timedelta(days=1), fee_rate=1.0)
