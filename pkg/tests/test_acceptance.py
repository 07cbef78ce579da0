"""Acceptance gate: each test enforces one release criterion at its stated
tolerance and prints a [PASS]/[FAIL] line (run with -s to see them all)."""

import math
import random
import time
from contextlib import contextmanager
from datetime import date
from pathlib import Path

import numpy as np

from conftest import make_random_posts
from coinpulse import cli
from coinpulse.backtest import StrategyConfig, return_pct, run_backtest
from coinpulse.corpus_stats import fleiss_kappa, monthly_activity, retention_overlap
from coinpulse.emotion_agg import EMOTIONS, argmax_emotion, EmotionLabel, weekly_curve
from coinpulse.signal import DailySeries, cross_correlate, pelt
from oracles import bellman_dp, exhaustive_min_cost, step_backtest

from test_backtest import random_fixture


@contextmanager
def criterion(name: str, budget: float | None = None):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    elapsed = time.perf_counter() - t0
    ok = budget is None or elapsed <= budget
    print(f"[{'PASS' if ok else 'FAIL'}] {name} ({elapsed:.2f}s)")
    assert ok, f"{name}: runtime {elapsed:.2f}s over the {budget}s budget"


# Published backtest table: (currency, lag, cc, portfolio value, printed return %).
PUBLISHED_ROWS = [
    ("Solana", -5, 0.78, 31_916_439, 3091.64),
    ("Polygon", 0, 0.93, 17_983_091, 1698.31),
    ("Axie Infinity", -35, 0.57, 11_952_354, 1095.24),
    ("TRON", -1, 0.72, 8_184_047, 718.40),
    ("Fantom", -1, 0.85, 5_855_175, 485.52),
    ("Hedera", 0, 0.79, 5_811_347, 481.13),
    ("Decentraland", 0, 0.72, 4_286_751, 328.68),
    ("Ethereum", -5, 0.82, 3_250_647, 225.06),
    ("THORChain", 0, 0.58, 2_745_402, 174.54),
    ("Avalanche", 0, 0.84, 2_416_548, 141.65),
    ("Cardano", -11, 0.83, 2_118_245, 111.82),
    ("Vechain", -2, 0.51, 1_854_393, 85.44),
    ("The Sandbox", -1, 0.76, 1_357_773, 35.78),
    ("Zcash", -1, 0.56, 1_326_302, 32.63),
    ("Litecoin", -6, 0.54, 1_275_137, 27.51),
    ("BNB", -1, 0.73, 1_235_578, 23.56),
    ("Shiba Inu", 0, 0.54, 998_057, -0.19),
    ("Tezos", -20, 0.59, 892_997, -10.70),
    ("Ethereum Classic", -2, 0.53, 783_639, -21.64),
    ("Cosmos", 0, 0.83, 714_024, -28.60),
    ("Bitcoin", -11, 0.63, 550_214, -44.98),
    ("XRP", -3, 0.57, 488_271, -51.17),
    ("Chainlink", 0, 0.75, 448_449, -55.16),
    ("Algorand", 0, 0.74, 440_951, -55.90),
    ("Bitcoin Cash", -1, 0.76, 402_104, -59.79),
    ("Stellar", -3, 0.72, 383_168, -61.68),
    ("Monero", -7, 0.82, 370_401, -62.96),
    ("Wrapped Bitcoin", -72, 0.54, 266_505, -73.35),
    ("Filecoin", -15, 0.57, 105_790, -89.42),
    ("Internet Computer", 0, 0.61, 100_895, -89.91),
]


def test_return_arithmetic_published_table():
    with criterion("return arithmetic over the 30 published rows", budget=1.0):
        assert len(PUBLISHED_ROWS) == 30
        for name, _, _, value, printed in PUBLISHED_ROWS:
            assert abs(return_pct(value, 1_000_000) - printed) <= 0.01, name
        total = sum(row[3] for row in PUBLISHED_ROWS)
        assert abs(return_pct(total, 30_000_000) - 268.38) <= 0.01


def _engine_vs_oracle(posts, price, cfg):
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
    assert ledger.final_value == final  # bit-identical
    for day, row in zip(ledger.days, rows):
        assert (day.date, day.signal, day.executed, day.cash, day.quantity, day.portfolio_value) == row
    return ledger


def test_backtest_oracle_equivalence():
    with criterion("backtest equals step-through oracle on 1000 fixtures x 3 fees", budget=10.0):
        rng = random.Random(2024)
        for case in range(1000):
            posts, price, base = random_fixture(rng)
            for fee in (0.0, 0.001, 0.01):
                cfg = StrategyConfig(
                    start_date=base.start_date,
                    end_date=base.end_date,
                    k=base.k,
                    fee_rate=fee,
                    initial_cash=base.initial_cash,
                )
                _engine_vs_oracle(posts, price, cfg)


def test_backtest_conservation_and_fee_drag():
    with criterion("zero-fee conservation and strict fee monotonicity", budget=10.0):
        rng = random.Random(2024)
        checked_conservation = checked_drag = 0
        for case in range(1000):
            posts, price, base = random_fixture(rng)
            finals = []
            for fee in (0.0, 0.001, 0.01):
                cfg = StrategyConfig(
                    start_date=base.start_date,
                    end_date=base.end_date,
                    k=base.k,
                    fee_rate=fee,
                    initial_cash=base.initial_cash,
                )
                ledger = run_backtest(posts, price, cfg)
                finals.append((ledger, fee))
            zero_fee = finals[0][0]
            cash, qty = zero_fee.initial_cash, 0.0
            for day in zero_fee.days:
                close = price.value_on(day.date)
                if day.executed:
                    before = cash + qty * close
                    after = day.cash + day.quantity * close
                    assert math.isclose(before, after, rel_tol=1e-9)
                    checked_conservation += 1
                cash, qty = day.cash, day.quantity
            n_trades = sum(1 for d in zero_fee.days if d.executed)
            if n_trades >= 1:
                v0, v1, v2 = (l.final_value for l, _ in finals)
                assert v0 > v1 > v2
                checked_drag += 1
        assert checked_conservation > 1000  # the fixtures really do trade
        assert checked_drag > 500


def _step_values(rng: random.Random, n: int) -> list[float]:
    values = []
    level = rng.uniform(-5, 5)
    for _ in range(n):
        if rng.random() < 0.2:
            level = rng.uniform(-5, 5)
        values.append(level + rng.gauss(0, 0.7))
    return values


def test_pelt_oracle_equivalence():
    with criterion("pelt equals exhaustive minimum (n<=16) and O(n^2) DP (n<=200)", budget=60.0):
        rng = random.Random(99)
        series = DailySeries  # local alias keeps the loop tight
        for case in range(500):
            n = rng.randrange(2, 17)
            values = _step_values(rng, n)
            penalty = rng.choice([0.1, 0.5, 1.0, 3.0, 10.0, 50.0])
            got = pelt(series(start_date=date(2021, 1, 1), values=tuple(values)), penalty)
            want = exhaustive_min_cost(values, penalty)
            assert math.isclose(got.total_cost, want, rel_tol=1e-9, abs_tol=1e-9)
        for case in range(100):
            n = rng.randrange(17, 201)
            values = _step_values(rng, n)
            penalty = rng.uniform(0.2, 40.0)
            got = pelt(series(start_date=date(2021, 1, 1), values=tuple(values)), penalty)
            want, _ = bellman_dp(values, penalty)
            assert math.isclose(got.total_cost, want, rel_tol=1e-9, abs_tol=1e-9)


def test_planted_lag_recovery():
    with criterion("planted lag recovered in >=95% of 200 noisy pairs", budget=30.0):
        rng = np.random.default_rng(4242)
        n, pad = 400, 40
        hits = 0
        for case in range(200):
            d = int(rng.integers(-30, 31))
            base = rng.normal(0.0, 1.0, n + 2 * pad)
            posts = DailySeries(start_date=date(2021, 1, 1), values=tuple(base[pad : pad + n]))
            noise = rng.normal(0.0, 1.0 / math.sqrt(10.0), n)  # variance SNR of 10
            price_vals = base[pad - d : pad - d + n] + noise
            price = DailySeries(start_date=date(2021, 1, 1), values=tuple(price_vals))
            lc = cross_correlate(posts, price, max_lag=90)
            if lc.best_lag == -d:
                hits += 1
        assert hits >= 190, f"only {hits}/200 recovered"


def test_invariant_fuzz_suite():
    with criterion(
        "xcorr affine invariance and bounds; overlap subset/disjoint; kappa unanimity",
        budget=60.0,
    ):
        rng = np.random.default_rng(31)
        for case in range(500):
            n = int(rng.integers(60, 161))
            x = DailySeries(start_date=date(2021, 1, 1), values=tuple(rng.normal(0, 1, n)))
            y_vals = rng.normal(0, 1, n)
            a = float(rng.uniform(0.1, 50.0))
            b = float(rng.uniform(-100.0, 100.0))
            y = DailySeries(start_date=date(2021, 1, 1), values=tuple(y_vals))
            y_aff = DailySeries(start_date=date(2021, 1, 1), values=tuple(a * y_vals + b))
            lc = cross_correlate(x, y, max_lag=8)
            lc_aff = cross_correlate(x, y_aff, max_lag=8)
            assert lc.lags == lc_aff.lags
            assert np.allclose(lc.coefficients, lc_aff.coefficients, atol=1e-9)
            assert all(-1.0 <= c <= 1.0 for c in lc.coefficients)

        pyrng = random.Random(32)
        for case in range(500):
            universe = [f"u{i}" for i in range(pyrng.randrange(2, 60))]
            a_set = set(pyrng.sample(universe, pyrng.randrange(1, len(universe))))
            extra = set(pyrng.sample(universe, pyrng.randrange(0, len(universe))))
            assert retention_overlap(a_set, a_set | extra) == 1.0
            disjoint = {f"v{i}" for i in range(pyrng.randrange(1, 20))}
            assert retention_overlap(a_set, disjoint) == 0.0

        for case in range(200):
            n_subjects = pyrng.randrange(2, 12)
            n_cats = pyrng.randrange(2, 7)
            n_raters = pyrng.randrange(2, 9)
            picks = [pyrng.randrange(n_cats) for _ in range(n_subjects)]
            if len(set(picks)) < 2:
                picks[0] = (picks[-1] + 1) % n_cats
            rows = []
            for c in picks:
                row = [0] * n_cats
                row[c] = n_raters
                rows.append(row)
            assert fleiss_kappa(rows) == 1.0


def _tree_bytes(root: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()
    }


def test_report_all_determinism(fixture_bundle, tmp_path):
    with criterion("report-all byte-identical across reruns and thread counts {1,8}"):
        cfg = str(fixture_bundle / "config.yaml")
        outs = []
        for name, threads in (("a", "1"), ("b", "1"), ("c", "8")):
            out = tmp_path / name
            code = cli.main(
                ["report-all", "--config", cfg, "--out", str(out), "--threads", threads]
            )
            assert code == 0
            outs.append(_tree_bytes(out))
        assert outs[0], "no artifacts produced"
        assert set(outs[0]) == set(outs[1]) == set(outs[2])
        for key in outs[0]:
            assert outs[0][key] == outs[1][key], f"{key} differs between identical runs"
            assert outs[0][key] == outs[2][key], f"{key} differs across thread counts"


def test_aggregation_matches_brute_force():
    with criterion("10k-record aggregation equals brute-force tallies"):
        rng = random.Random(777)
        posts = make_random_posts(rng, 10_000)

        # corpus-level brute force
        per_month: dict[str, list] = {}
        first_month: dict[str, str] = {}
        for p in posts:
            per_month.setdefault(p.month(), []).append(p)
            if p.author not in first_month or p.month() < first_month[p.author]:
                first_month[p.author] = p.month()
        got = monthly_activity(posts)["corpus"]
        assert set(got) == set(per_month)
        for month, bucket in per_month.items():
            cohort = got[month]
            assert cohort.post_count == len(bucket)
            assert cohort.active_users == {p.author for p in bucket}
            assert cohort.new_users == {
                a for a, m in first_month.items() if m == month
            } & cohort.active_users
        assert sum(len(c.new_users) for c in got.values()) == len({p.author for p in posts})

        # per-subreddit brute force: first appearance within the subreddit
        got_sub = monthly_activity(posts, group_by="subreddit")
        sub_first: dict[tuple[str, str], str] = {}
        sub_month: dict[tuple[str, str], list] = {}
        for p in posts:
            sub_month.setdefault((p.subreddit, p.month()), []).append(p)
            key = (p.subreddit, p.author)
            if key not in sub_first or p.month() < sub_first[key]:
                sub_first[key] = p.month()
        for (sub, month), bucket in sub_month.items():
            cohort = got_sub[sub][month]
            assert cohort.post_count == len(bucket)
            assert cohort.active_users == {p.author for p in bucket}
            assert cohort.new_users == {
                a for (s, a), m in sub_first.items() if s == sub and m == month
            }

        # emotion weekly curve brute force over the same posts
        labels = {}
        for p in posts:
            raw = [rng.random() for _ in range(6)]
            total = sum(raw)
            scores = tuple(v / total for v in raw)
            labels[p.id] = EmotionLabel(
                post_id=p.id, scores=scores, argmax_label=argmax_emotion(scores)
            )
        pairs = [(p, labels[p.id]) for p in posts]
        curve = weekly_curve(pairs)
        weeks: dict[str, list] = {}
        for p in posts:
            y, w, _ = p.day().isocalendar()
            weeks.setdefault(f"{y:04d}-W{w:02d}", []).append(labels[p.id].scores)
        assert len(curve.buckets) == len(weeks)
        for bucket in curve.buckets:
            rows = weeks[bucket.period]
            assert bucket.post_count == len(rows)
            for i in range(len(EMOTIONS)):
                total = 0.0
                for r in rows:
                    total += r[i]
                assert bucket.mean_scores[i] == total / len(rows)  # identical fp accumulation
