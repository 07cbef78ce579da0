#!/usr/bin/env python3
"""Regenerate the synthetic fixture bundle under fixtures/.

The bundle is deterministic for a given seed and is checked in; tests read
the committed files and never regenerate them. Each currency's price series
is its posting intensity shifted by a planted lag (PLANTED_LAGS), so the
lead-lag analysis has a known right answer.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from coinpulse.cli import slugify  # noqa: E402

POSTS_START = date(2020, 12, 1)
POSTS_END = date(2021, 12, 31)
PRICE_START = date(2021, 1, 1)
PRICE_END = date(2021, 12, 31)

# currency -> (match terms, shift in days; positive means posts lead price)
COINS = {
    "Alphacoin": (["alphacoin", "alpha coin"], 4),
    "Betacoin": (["betacoin"], 0),
    "Gamma Token": (["gamma token", "gammatoken"], -2),
}
PLANTED_LAGS = {name: -shift for name, (_, shift) in COINS.items()}

SUBREDDITS = ("alpha_hub", "beta_den", "gamma_lounge", "coin_plaza", "random_chat")
# emotion weight boost per subreddit: (joy, sadness, anger, fear, surprise, neutral)
EMOTION_BIAS = {
    "alpha_hub": (2.2, 1.0, 1.0, 1.0, 1.0, 4.0),
    "beta_den": (1.0, 1.0, 2.2, 1.0, 1.0, 4.0),
    "gamma_lounge": (1.0, 1.0, 1.0, 2.0, 1.0, 4.0),
    "coin_plaza": (1.0, 1.8, 1.0, 1.0, 1.0, 4.0),
    "random_chat": (1.0, 1.0, 1.0, 1.0, 1.7, 4.0),
}

MENTION_TEMPLATES = (
    "just bought more {term} today",
    "is {term} going to recover this week?",
    "{term} chart looks wild",
    "holding my {term} bag no matter what",
    "why is {term} pumping again",
)
NOISE_TEMPLATES = (
    "what wallet do you all use",
    "the market feels quiet today",
    "anyone going to the meetup",
    "charts are boring lately",
    "read an interesting thread about exchanges",
)


def intensity_curve(rng: random.Random, days: int, base: float, period: float) -> list[float]:
    """Smooth positive curve: seasonal swing plus AR(1) wander."""
    values = []
    e = 0.0
    for t in range(days):
        e = 0.8 * e + rng.gauss(0.0, 2.0)
        v = base + 8.0 * math.sin(2 * math.pi * t / period) + e
        values.append(max(1.0, v))
    return values


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(REPO / "fixtures"))
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args()
    rng = random.Random(args.seed)
    out = Path(args.out)
    (out / "prices").mkdir(parents=True, exist_ok=True)

    n_days = (POSTS_END - POSTS_START).days + 1
    curves = {
        name: intensity_curve(rng, n_days, base=13.0, period=47.0 + 16.0 * i)
        for i, name in enumerate(COINS)
    }

    # prices: value at day t follows the posting intensity `shift` days earlier
    for i, (name, (_, shift)) in enumerate(COINS.items()):
        scale = 0.8 + 0.5 * i
        gap_day = PRICE_START + timedelta(days=100 + 31 * i)  # exercises forward-fill
        rows = ["date,close"]
        d = PRICE_START
        while d <= PRICE_END:
            src = (d - POSTS_START).days - shift
            src = min(max(src, 0), n_days - 1)
            close = scale * curves[name][src] * (1.0 + rng.gauss(0.0, 0.005))
            if d != gap_day:
                rows.append(f"{d.isoformat()},{close:.6f}")
            d += timedelta(days=1)
        (out / "prices" / f"{slugify(name)}.csv").write_text("\n".join(rows) + "\n")

    # registry
    registry_lines = ["coins:"]
    for name, (terms, _) in COINS.items():
        registry_lines.append(f"  - canonical_name: {name}")
        registry_lines.append(f"    match_terms: [{', '.join(terms)}]")
        registry_lines.append("    listing_date: 2021-01-01")
    (out / "registry.yaml").write_text("\n".join(registry_lines) + "\n")

    # posts: per-day mention counts follow the curves; plus background chatter,
    # a moderation bot, and three heavy spammers
    author_pool = [f"user{i:04d}" for i in range(700)]
    spammers = ["spambot_a", "spambot_b", "spambot_c"]
    posts = []
    pid = 0

    def emit(day: date, author: str, subreddit: str, text: str, spam_score=None):
        nonlocal pid
        pid += 1
        kind = "submission" if rng.random() < 0.3 else "comment"
        ts = int(
            datetime(day.year, day.month, day.day, tzinfo=timezone.utc).timestamp()
        ) + rng.randrange(0, 86400)
        rec = {
            "id": f"p{pid:07d}",
            "author": author,
            "subreddit": subreddit,
            "kind": kind,
            "created_utc": ts,
        }
        if kind == "submission":
            rec["title"] = text
            rec["body"] = rng.choice(NOISE_TEMPLATES)
        else:
            rec["body"] = text
        if spam_score is not None:
            rec["spam_score"] = round(spam_score, 3)
        posts.append(rec)

    def pick_author(day_idx: int) -> str:
        # sliding window over the pool: steady churn, so every month sees new names
        lo = int(len(author_pool) * 0.75 * day_idx / n_days)
        span = 170
        return author_pool[min(lo + int(rng.expovariate(1 / 35.0)) % span, len(author_pool) - 1)]

    home = {"Alphacoin": "alpha_hub", "Betacoin": "beta_den", "Gamma Token": "gamma_lounge"}
    for t in range(n_days):
        day = POSTS_START + timedelta(days=t)
        for name, (terms, _) in COINS.items():
            for _ in range(round(curves[name][t])):
                term = terms[0] if rng.random() < 0.8 else rng.choice(terms)
                text = rng.choice(MENTION_TEMPLATES).format(term=term)
                sub = home[name] if rng.random() < 0.6 else "coin_plaza"
                score = rng.random() * 0.5 if rng.random() < 0.3 else None
                emit(day, pick_author(t), sub, text, score)
        for _ in range(10):
            emit(day, pick_author(t), rng.choice(SUBREDDITS), rng.choice(NOISE_TEMPLATES))
        if t % 3 == 0:
            emit(day, "AutoModerator", rng.choice(SUBREDDITS), "this thread is locked")
        for spammer in spammers:
            if rng.random() < 0.5:
                emit(
                    day,
                    spammer,
                    rng.choice(SUBREDDITS),
                    f"click here for free {rng.choice(['alphacoin', 'betacoin'])}",
                    spam_score=0.93 + rng.random() * 0.06,
                )

    split = date(2021, 1, 1)
    for fname, selector in (
        ("posts_2020.ndjson", lambda r: r["created_utc"] < datetime(2021, 1, 1, tzinfo=timezone.utc).timestamp()),
        ("posts_2021.ndjson", lambda r: r["created_utc"] >= datetime(2021, 1, 1, tzinfo=timezone.utc).timestamp()),
    ):
        with open(out / fname, "w") as fh:
            for rec in posts:
                if selector(rec):
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")

    # labels for ~90% of posts, biased by subreddit
    emotions = ("joy", "sadness", "anger", "fear", "surprise", "neutral")
    with open(out / "labels.ndjson", "w") as fh:
        for rec in posts:
            if rng.random() < 0.1:
                continue
            bias = EMOTION_BIAS[rec["subreddit"]] if rec["subreddit"] in EMOTION_BIAS else (1.0,) * 6
            raw = [rng.random() * b for b in bias]
            total = sum(raw)
            scores = [v / total for v in raw]
            label = emotions[max(range(6), key=lambda i: scores[i])]
            obj = {"post_id": rec["id"]}
            obj.update({e: scores[i] for i, e in enumerate(emotions)})
            obj["label"] = label
            fh.write(json.dumps(obj) + "\n")

    config = f"""\
posts:
  - posts_2020.ndjson
  - posts_2021.ndjson
archive_dialect: native
registry: registry.yaml
prices_dir: prices
labels: labels.ndjson
out: out
max_lag: 30
granularity: month
start: 2021-02-01
end: 2021-11-30
write_ledgers: true
events:
  - {{name: spring_rally, month: "2021-04"}}
  - {{name: summer_dip, month: "2021-06"}}
"""
    (out / "config.yaml").write_text(config)
    print(f"wrote fixture bundle to {out} ({len(posts)} posts)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
