"""Batch CLI: runs the configured analyses and writes deterministic artifacts."""

from __future__ import annotations

import argparse
import json
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import date, timedelta
from pathlib import Path
from typing import Callable, Sequence, TypeVar

from coinpulse import __version__, backtest, corpus_stats, emotion_agg
from coinpulse import ingest as ingest_mod
from coinpulse import signal as signal_mod
from coinpulse.config import ConfigError, RunConfig, load_config
from coinpulse.report import fmt, line_chart, radar_chart, write_csv

T = TypeVar("T")
U = TypeVar("U")

COMMANDS = (
    "ingest",
    "activity",
    "users",
    "retention",
    "changepoints",
    "xcorr",
    "backtest",
    "emotions",
    "report-all",
)


def slugify(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")


def months_between(first: str, last: str) -> list[str]:
    y0, m0 = int(first[:4]), int(first[5:7])
    y1, m1 = int(last[:4]), int(last[5:7])
    out = []
    i = y0 * 12 + m0 - 1
    end = y1 * 12 + m1 - 1
    while i <= end:
        out.append(f"{i // 12:04d}-{i % 12 + 1:02d}")
        i += 1
    return out


class Pipeline:
    """Lazily loads stores and fans per-currency analyses out across threads."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out = Path(cfg.out)
        self.artifacts: list[str] = []
        self._cache: dict[str, object] = {}
        self.provenance = f"engine=coinpulse/{__version__} config={cfg.hash()}"

    # -- shared stores ------------------------------------------------

    def _get(self, key: str, build: Callable[[], T]) -> T:
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]  # type: ignore[return-value]

    @property
    def registry(self) -> ingest_mod.CoinRegistry:
        return self._get(
            "registry",
            lambda: ingest_mod.load_registry(self.cfg.registry, plural_suffix=self.cfg.plural_suffix),
        )

    @property
    def archives(self) -> list[tuple[Path, list[ingest_mod.PostRecord], ingest_mod.IngestManifest]]:
        def build():
            out = []
            for path in self.cfg.posts:
                records, manifest = ingest_mod.load_posts(path, dialect=self.cfg.archive_dialect)
                out.append((path, records, manifest))
            return out

        return self._get("archives", build)

    @property
    def raw_posts(self) -> list[ingest_mod.PostRecord]:
        return self._get(
            "raw_posts", lambda: [p for _, records, _ in self.archives for p in records]
        )

    @property
    def excluded_authors(self) -> set[str]:
        def build():
            if not self.cfg.spam_filter:
                return {corpus_stats.AUTOMODERATOR}
            profiles = corpus_stats.build_profiles(
                self.raw_posts, spam_threshold=self.cfg.spam_score_threshold
            )
            return corpus_stats.filter_spam_users(
                profiles.values(), user_threshold=self.cfg.spam_user_threshold
            )

        return self._get("excluded", build)

    @property
    def posts(self) -> list[ingest_mod.PostRecord]:
        """Corpus after spam and bot exclusion; every analysis consumes this."""
        return self._get(
            "posts", lambda: corpus_stats.exclude_authors(self.raw_posts, self.excluded_authors)
        )

    @property
    def coin_names(self) -> list[str]:
        def build():
            names = list(self.registry.names())
            if self.cfg.coins is not None:
                unknown = [c for c in self.cfg.coins if c not in names]
                if unknown:
                    raise ConfigError(f"coins not in registry: {', '.join(unknown)}")
                return list(self.cfg.coins)
            return names

        return self._get("coin_names", build)

    @property
    def coin_posts(self) -> dict[str, list[ingest_mod.PostRecord]]:
        def build():
            by_coin: dict[str, list[ingest_mod.PostRecord]] = {c: [] for c in self.coin_names}
            wanted = set(self.coin_names)
            for post in self.posts:
                for name in ingest_mod.match_mentions(post, self.registry):
                    if name in wanted:
                        by_coin[name].append(post)
            return by_coin

        return self._get("coin_posts", build)

    @property
    def prices(self) -> dict[str, signal_mod.DailySeries]:
        def build():
            out: dict[str, signal_mod.DailySeries] = {}
            if self.cfg.prices_dir is None:
                return out
            for name in self.coin_names:
                path = Path(self.cfg.prices_dir) / f"{slugify(name)}.csv"
                if not path.is_file():
                    self.warn(f"{name}: no price file at {path.name}, skipped")
                    continue
                series = ingest_mod.load_prices(path, currency=name)
                if len(series) == 0:
                    self.warn(f"{name}: empty price file, skipped")
                    continue
                out[name] = series
            return out

        return self._get("prices", build)

    @property
    def subreddit_selection(self) -> list[str]:
        def build():
            if self.cfg.subreddits is not None:
                return list(self.cfg.subreddits)
            counts: dict[str, int] = {}
            for post in self.posts:
                counts[post.subreddit] = counts.get(post.subreddit, 0) + 1
            ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
            return [name for name, _ in ranked[: self.cfg.top_subreddits]]

        return self._get("subreddits", build)

    @property
    def joined_labels(self):
        def build():
            labels = emotion_agg.load_labels(self.cfg.labels)
            return emotion_agg.join_labels(self.posts, labels)

        return self._get("joined", build)

    @property
    def lag_results(self) -> dict[str, signal_mod.LagCorrelation]:
        def build():
            # materialize shared stores before fanning out across threads
            _ = (self.prices, self.coin_posts)

            def one(name: str):
                price = self.prices.get(name)
                if price is None:
                    return name, None
                series = signal_mod.aggregate(self.coin_posts[name], "day", label=name)
                if len(series) < self.cfg.min_overlap:
                    self.warn(f"{name}: too few posting days for cross-correlation, skipped")
                    return name, None
                try:
                    lc = signal_mod.cross_correlate(
                        series, price, max_lag=self.cfg.max_lag, min_overlap=self.cfg.min_overlap
                    )
                except signal_mod.DegenerateSeries as exc:
                    self.warn(f"{name}: {exc}")
                    return name, None
                return name, lc

            pairs = self._map(one, self.coin_names)
            return {name: lc for name, lc in pairs if lc is not None}

        return self._get("lags", build)

    # -- helpers ------------------------------------------------------

    def _map(self, fn: Callable[[T], U], items: Sequence[T]) -> list[U]:
        if self.cfg.threads > 1 and len(items) > 1:
            with ThreadPoolExecutor(max_workers=self.cfg.threads) as ex:
                return list(ex.map(fn, items))
        return [fn(item) for item in items]

    def warn(self, message: str) -> None:
        print(f"coinpulse: warning: {message}", file=sys.stderr)

    def emit_csv(self, name: str, header: Sequence[str], rows) -> None:
        write_csv(self.out / name, header, rows, provenance=self.provenance)
        self.artifacts.append(name)

    def track(self, name: str) -> Path:
        self.artifacts.append(name)
        return self.out / name

    def write_manifest(self, status: str, error: str | None = None) -> None:
        payload = {
            "status": status,
            "error": error,
            "engine": f"coinpulse/{__version__}",
            "config": self.cfg.hash(),
            "artifacts": sorted(self.artifacts),
        }
        (self.out / "run_manifest.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    # -- commands -----------------------------------------------------

    def cmd_ingest(self) -> None:
        rows = []
        total_parsed = total_skipped = 0
        for path, _, manifest in self.archives:
            rows.append([path.name, str(manifest.parsed), str(manifest.skipped)])
            total_parsed += manifest.parsed
            total_skipped += manifest.skipped
        rows.append(["total", str(total_parsed), str(total_skipped)])
        self.emit_csv("ingest_manifest.csv", ["file", "parsed", "skipped"], rows)

        mention_rows = [
            [name, str(len(self.coin_posts[name]))] for name in self.coin_names
        ]
        self.emit_csv("coin_mentions.csv", ["currency", "posts"], mention_rows)

    def _monthly_table(self):
        def build():
            corpus = corpus_stats.monthly_activity(self.posts, "corpus").get(
                corpus_stats.CORPUS_SCOPE, {}
            )
            by_sub = corpus_stats.monthly_activity(self.posts, "subreddit")
            scopes: list[tuple[str, dict[str, corpus_stats.MonthlyCohort]]] = [
                (corpus_stats.CORPUS_SCOPE, corpus)
            ]
            for name in self.subreddit_selection:
                scopes.append((name, by_sub.get(name, {})))
            table: dict[str, dict] = {}
            for scope, cohorts in scopes:
                if cohorts:
                    months = months_between(min(cohorts), max(cohorts))
                else:
                    months = []
                posts_row, active_row, new_row, overlap_row = [], [], [], []
                prev_active: set[str] = set()
                for month in months:
                    cohort = cohorts.get(month)
                    active = cohort.active_users if cohort else set()
                    posts_row.append(cohort.post_count if cohort else 0)
                    active_row.append(len(active))
                    new_row.append(len(cohort.new_users) if cohort else 0)
                    overlap_row.append(corpus_stats.retention_overlap(active, prev_active))
                    prev_active = active
                table[scope] = {
                    "months": months,
                    "posts": posts_row,
                    "active": active_row,
                    "new": new_row,
                    "overlap": overlap_row,
                }
            return table

        return self._get("monthly_table", build)

    def _write_monthly_stats(self) -> None:
        if "monthly_stats.csv" in self.artifacts:
            return
        table = self._monthly_table()
        rows = []
        for scope, data in table.items():
            for i, month in enumerate(data["months"]):
                rows.append(
                    [
                        month,
                        scope,
                        str(data["posts"][i]),
                        str(data["active"][i]),
                        str(data["new"][i]),
                        fmt(data["overlap"][i], 4),
                    ]
                )
        self.emit_csv(
            "monthly_stats.csv",
            ["month", "scope", "posts", "active_users", "new_users", "overlap_prev_month"],
            rows,
        )

    def _scope_series(self, table, key: str) -> tuple[list[str], list[tuple[str, list[float]]]]:
        corpus_months = table.get(corpus_stats.CORPUS_SCOPE, {}).get("months", [])
        if not corpus_months:
            return [], []
        index = {m: i for i, m in enumerate(corpus_months)}
        out = []
        for scope, data in table.items():
            dense = [0.0] * len(corpus_months)
            for m, v in zip(data["months"], data[key]):
                if m in index:
                    dense[index[m]] = float(v)
            peak = max(dense)
            if peak > 0:
                dense = [v / peak for v in dense]
            out.append((scope, dense))
        return corpus_months, out

    def cmd_activity(self) -> None:
        self._write_monthly_stats()
        table = self._monthly_table()
        months, series = self._scope_series(table, "posts")
        if months:
            line_chart(
                self.track("activity.svg"), series, months, "Monthly posts (peak-normalized)"
            )

    def cmd_users(self) -> None:
        self._write_monthly_stats()
        table = self._monthly_table()
        corpus = table.get(corpus_stats.CORPUS_SCOPE)
        if corpus and corpus["months"]:
            line_chart(
                self.track("users.svg"),
                [
                    ("active", [float(v) for v in corpus["active"]]),
                    ("new", [float(v) for v in corpus["new"]]),
                ],
                corpus["months"],
                "Monthly active and new users",
            )

    def cmd_retention(self) -> None:
        self._write_monthly_stats()
        table = self._monthly_table()
        months = table.get(corpus_stats.CORPUS_SCOPE, {}).get("months", [])
        if not months:
            return
        index = {m: i for i, m in enumerate(months)}
        series = []
        for scope, data in table.items():
            dense = [0.0] * len(months)
            for m, v in zip(data["months"], data["overlap"]):
                if m in index:
                    dense[index[m]] = float(v)
            series.append((scope, dense))
        line_chart(
            self.track("retention.svg"),
            series,
            months,
            "Month-over-month active-user overlap",
        )

    def _changepoints_for(
        self, label: str, series: signal_mod.DailySeries
    ) -> tuple[str, signal_mod.DailySeries, signal_mod.ChangepointResult] | None:
        if len(series) < 2:
            self.warn(f"changepoints {label}: series too short, skipped")
            return None
        penalty = self.cfg.penalty or signal_mod.default_penalty(len(series))
        result = signal_mod.pelt(signal_mod.zscored(series.values), penalty)
        return label, series, result

    def cmd_changepoints(self) -> None:
        targets: list[tuple[str, signal_mod.DailySeries]] = []
        if self.cfg.changepoint_series in ("activity", "both"):
            series = signal_mod.aggregate(self.posts, self.cfg.granularity, label="corpus")
            targets.append(("activity_corpus", series))
        if self.cfg.changepoint_series in ("price", "both"):
            for name in self.coin_names:
                price = self.prices.get(name)
                if price is not None:
                    targets.append((f"price_{slugify(name)}", price))
        results = self._map(lambda t: self._changepoints_for(t[0], t[1]), targets)
        for item in results:
            if item is None:
                continue
            label, series, result = item
            rows = [
                [str(i), series.date_of(i).isoformat()] for i in result.breakpoints
            ]
            self.emit_csv(f"changepoints_{label}.csv", ["index", "date"], rows)
            line_chart(
                self.track(f"changepoints_{label}.svg"),
                [(label, [float(v) for v in series.values])],
                [d.isoformat() for d in series.dates()],
                f"Changepoints: {label} (penalty {fmt(result.penalty, 3)})",
                markers=list(result.breakpoints),
            )

    def cmd_xcorr(self) -> None:
        summary_rows = []
        for name in sorted(self.lag_results):
            lc = self.lag_results[name]
            slug = slugify(name)
            self.emit_csv(
                f"xcorr_{slug}.csv",
                ["lag", "coefficient"],
                [[str(l), fmt(c, 6)] for l, c in zip(lc.lags, lc.coefficients)],
            )
            line_chart(
                self.track(f"xcorr_{slug}.svg"),
                [(name, list(lc.coefficients))],
                [str(l) for l in lc.lags],
                f"Cross-correlation: {name}",
                markers=[lc.lags.index(lc.best_lag)],
            )
            summary_rows.append(
                [
                    name,
                    str(lc.best_lag),
                    fmt(lc.best_coefficient, 4),
                    str(signal_mod.interpret_lag(lc)),
                ]
            )
        self.emit_csv(
            "xcorr_summary.csv",
            ["currency", "best_lag", "best_coefficient", "reading"],
            summary_rows,
        )

    def _backtest_one(self, name: str):
        price = self.prices.get(name)
        if price is None:
            return None
        if self.cfg.k is not None:
            k, lag_cell, cc_cell = self.cfg.k, "", ""
        else:
            lc = self.lag_results.get(name)
            if lc is None:
                self.warn(f"{name}: no lag estimate, backtest skipped")
                return None
            k = backtest.derive_k(lc.best_lag)
            lag_cell, cc_cell = str(lc.best_lag), fmt(lc.best_coefficient, 2)
        series = signal_mod.aggregate(self.coin_posts[name], "day", label=name)
        if len(series) == 0:
            self.warn(f"{name}: no posts, backtest skipped")
            return None
        feasible_start = max(price.start_date, series.start_date + timedelta(days=k + 1))
        feasible_end = min(price.end_date, series.end_date + timedelta(days=k))
        start = self.cfg.start or feasible_start
        end = self.cfg.end or feasible_end
        if start >= end:
            self.warn(f"{name}: empty trading window, backtest skipped")
            return None
        cfg = backtest.StrategyConfig(
            start_date=start,
            end_date=end,
            k=k,
            fee_rate=self.cfg.fee_rate,
            initial_cash=self.cfg.initial_cash,
        )
        try:
            ledger = backtest.run_backtest(series, price, cfg)
        except (backtest.MissingBar, backtest.InsufficientHistory) as exc:
            self.warn(f"{name}: {exc}")
            return None
        return name, k, lag_cell, cc_cell, ledger

    def cmd_backtest(self) -> None:
        _ = (self.prices, self.coin_posts)
        if self.cfg.k is None:
            _ = self.lag_results
        results = [r for r in self._map(self._backtest_one, self.coin_names) if r is not None]
        if not results:
            raise RuntimeError("backtest: no currency could be simulated")
        results.sort(key=lambda r: (-r[4].return_pct, r[0]))
        rows = [
            [name, lag_cell, cc_cell, fmt(ledger.final_value, 2), fmt(ledger.return_pct, 2)]
            for name, _, lag_cell, cc_cell, ledger in results
        ]
        summary = backtest.portfolio_summary([r[4] for r in results])
        rows.append(
            [
                "Total",
                "",
                "",
                fmt(summary["total_final"], 2),
                fmt(summary["total_return_pct"], 2),
            ]
        )
        notes = []
        same_day = sorted(name for name, k, *_ in results if k == 0)
        if same_day:
            notes.append(
                "k=0 currencies trade on the same day's complete post count, which is "
                "not observable intraday: " + ", ".join(same_day)
            )
        write_csv(
            self.out / "backtest_report.csv",
            ["currency", "lag", "cc_score", "portfolio_value", "return_pct"],
            rows,
            provenance=self.provenance,
            notes=notes,
        )
        self.artifacts.append("backtest_report.csv")
        if self.cfg.write_ledgers:
            for name, _, _, _, ledger in results:
                self.emit_csv(
                    f"ledger_{slugify(name)}.csv",
                    ["date", "signal", "executed", "cash", "quantity", "portfolio_value"],
                    [
                        [
                            day.date.isoformat(),
                            day.signal,
                            "1" if day.executed else "0",
                            repr(day.cash),
                            repr(day.quantity),
                            repr(day.portfolio_value),
                        ]
                        for day in ledger.days
                    ],
                )

    def cmd_emotions(self) -> None:
        joined, manifest = self.joined_labels
        mode = self.cfg.emotion_mode
        self.emit_csv(
            "emotion_coverage.csv",
            ["labeled", "unlabeled", "orphan_labels"],
            [[str(manifest.labeled), str(manifest.unlabeled), str(manifest.orphan_labels)]],
        )
        curve = emotion_agg.weekly_curve(joined, mode=mode)
        self.emit_csv(
            "emotion_weekly.csv",
            ["week", "posts"] + list(emotion_agg.EMOTIONS),
            [
                [b.period, str(b.post_count)] + [fmt(s, 6) for s in b.mean_scores]
                for b in curve.buckets
            ],
        )
        if curve.buckets:
            line_chart(
                self.track("emotions_weekly.svg"),
                [
                    (
                        emotion,
                        [b.mean_scores[i] for b in curve.buckets],
                    )
                    for i, emotion in enumerate(emotion_agg.REPORTED)
                ],
                [b.period for b in curve.buckets],
                "Weekly mean emotion scores",
            )
        if self.cfg.subreddits is not None:
            wanted = set(self.cfg.subreddits)
            summary = emotion_agg.subreddit_summary(
                [(p, l) for p, l in joined if p.subreddit in wanted], mode=mode
            )
        else:
            summary = emotion_agg.subreddit_summary(
                joined, top_n=self.cfg.top_subreddits, mode=mode
            )
        self.emit_csv(
            "emotion_subreddits.csv",
            ["subreddit", "posts"] + list(emotion_agg.REPORTED),
            [
                [row.subreddit, str(row.post_count)] + [fmt(s, 6) for s in row.means]
                for row in summary.rows
            ],
        )
        self.emit_csv(
            "emotion_extremes.csv",
            ["emotion", "highest_subreddit", "lowest_subreddit"],
            [
                [emotion, summary.highest.get(emotion, ""), summary.lowest.get(emotion, "")]
                for emotion in emotion_agg.REPORTED
            ],
        )
        radar = emotion_agg.event_radar(joined, self.cfg.events, mode=mode)
        self.emit_csv(
            "emotion_events.csv",
            ["event", "month", "posts"] + list(emotion_agg.REPORTED),
            [
                [row.name, row.month, str(row.post_count)] + [fmt(s, 6) for s in row.means]
                for row in radar
            ],
        )
        if radar:
            radar_chart(
                self.track("emotions_events.svg"),
                list(emotion_agg.REPORTED),
                [(row.name, list(row.means)) for row in radar],
                "Mean emotion scores in event months",
            )

    def cmd_report_all(self) -> None:
        self.cmd_ingest()
        self.cmd_activity()
        self.cmd_users()
        self.cmd_retention()
        self.cmd_changepoints()
        self.cmd_xcorr()
        self.cmd_backtest()
        if self.cfg.labels is not None:
            self.cmd_emotions()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coinpulse",
        description="Batch analytics over post archives and daily price bars.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="run configuration file (YAML)")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--coins", help="comma-separated canonical currency names")
    parser.add_argument("--subreddits", help="comma-separated subreddit names")
    parser.add_argument("--from", dest="start", help="trading window start (YYYY-MM-DD)")
    parser.add_argument("--to", dest="end", help="trading window end (YYYY-MM-DD)")
    parser.add_argument("--max-lag", type=int, help="largest |lag| scanned, in days")
    parser.add_argument("--penalty", type=float, help="changepoint penalty")
    parser.add_argument("--fee", type=float, help="transaction fee rate")
    parser.add_argument("--k", type=int, help="signal lookback override, in days")
    parser.add_argument("--threads", type=int, help="worker threads for per-currency fan-out")
    return parser


def apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> None:
    if args.out is not None:
        cfg.out = Path(args.out)
    if args.coins is not None:
        cfg.coins = [c.strip() for c in args.coins.split(",") if c.strip()]
    if args.subreddits is not None:
        cfg.subreddits = [s.strip() for s in args.subreddits.split(",") if s.strip()]
    if args.start is not None:
        cfg.start = date.fromisoformat(args.start)
    if args.end is not None:
        cfg.end = date.fromisoformat(args.end)
    if args.max_lag is not None:
        cfg.max_lag = args.max_lag
    if args.penalty is not None:
        cfg.penalty = args.penalty
    if args.fee is not None:
        cfg.fee_rate = args.fee
    if args.k is not None:
        cfg.k = args.k
    if args.threads is not None:
        cfg.threads = args.threads


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        apply_overrides(cfg, args)
        cfg.validate(need_labels=args.command == "emotions")
    except (ConfigError, ValueError) as exc:
        print(f"coinpulse: config error: {exc}", file=sys.stderr)
        return 2

    pipeline = Pipeline(cfg)
    pipeline.out.mkdir(parents=True, exist_ok=True)
    handlers = {
        "ingest": pipeline.cmd_ingest,
        "activity": pipeline.cmd_activity,
        "users": pipeline.cmd_users,
        "retention": pipeline.cmd_retention,
        "changepoints": pipeline.cmd_changepoints,
        "xcorr": pipeline.cmd_xcorr,
        "backtest": pipeline.cmd_backtest,
        "emotions": pipeline.cmd_emotions,
        "report-all": pipeline.cmd_report_all,
    }
    try:
        handlers[args.command]()
    except ConfigError as exc:
        print(f"coinpulse: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - partial artifacts stay on disk
        pipeline.write_manifest(status="error", error=f"{type(exc).__name__}: {exc}")
        print(f"coinpulse: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    pipeline.write_manifest(status="ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
