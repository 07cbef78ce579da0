from __future__ import annotations

import random
from datetime import date, datetime, timezone
from pathlib import Path

import pytest

from coinpulse.ingest import PostRecord

REPO = Path(__file__).resolve().parents[1]
FIXTURES = REPO / "fixtures"


@pytest.fixture(scope="session")
def fixture_bundle() -> Path:
    assert (FIXTURES / "config.yaml").is_file(), "run scripts/make_fixtures.py first"
    return FIXTURES


def epoch(day: date, second: int = 43200) -> int:
    return int(datetime(day.year, day.month, day.day, tzinfo=timezone.utc).timestamp()) + second


def make_post(
    pid: str,
    author: str = "alice",
    subreddit: str = "coin_plaza",
    kind: str = "comment",
    day: date = date(2021, 3, 5),
    second: int = 43200,
    body: str = "hello",
    title: str | None = None,
    spam_score: float | None = None,
) -> PostRecord:
    return PostRecord(
        id=pid,
        author=author,
        subreddit=subreddit,
        kind=kind,
        created_utc=epoch(day, second),
        body=body,
        title=title,
        spam_score=spam_score,
    )


def make_random_posts(
    rng: random.Random,
    n: int,
    n_authors: int = 400,
    subreddits: tuple[str, ...] = ("alpha_hub", "beta_den", "coin_plaza"),
    start: date = date(2020, 6, 1),
    span_days: int = 550,
) -> list[PostRecord]:
    posts = []
    for i in range(n):
        day = date.fromordinal(start.toordinal() + rng.randrange(span_days))
        kind = "submission" if rng.random() < 0.3 else "comment"
        posts.append(
            PostRecord(
                id=f"r{i:06d}",
                author=f"user{rng.randrange(n_authors):04d}",
                subreddit=rng.choice(subreddits),
                kind=kind,
                created_utc=epoch(day, rng.randrange(86400)),
                body="some text",
                title="a title" if kind == "submission" else None,
                spam_score=round(rng.random(), 3) if rng.random() < 0.4 else None,
            )
        )
    return posts
