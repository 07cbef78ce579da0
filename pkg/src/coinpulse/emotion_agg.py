"""Aggregation of per-post emotion labels into weekly curves and summaries."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from coinpulse.ingest import PostRecord

log = logging.getLogger(__name__)

EMOTIONS = ("joy", "sadness", "anger", "fear", "surprise", "neutral")
# Non-neutral classes reported in subreddit and event summaries.
REPORTED = EMOTIONS[:5]

SCORE_TOL = 1e-6

# How "average score" is computed: mean class probability, or share of
# posts whose top label is the class.
MODE_PROBABILITY = "probability"
MODE_LABEL_SHARE = "label_share"


class DuplicateLabel(Exception):
    """Two label records for the same post id."""


def argmax_emotion(scores: Sequence[float]) -> str:
    """Top class, ties resolved by the fixed class order."""
    best = 0
    for i in range(1, len(EMOTIONS)):
        if scores[i] > scores[best]:
            best = i
    return EMOTIONS[best]


@dataclass(frozen=True)
class EmotionLabel:
    post_id: str
    scores: tuple[float, ...]
    argmax_label: str

    def __post_init__(self) -> None:
        if len(self.scores) != len(EMOTIONS):
            raise ValueError(f"{self.post_id}: expected {len(EMOTIONS)} scores")
        if any(not 0.0 <= s <= 1.0 for s in self.scores):
            raise ValueError(f"{self.post_id}: scores outside [0,1]")
        if abs(sum(self.scores) - 1.0) > SCORE_TOL:
            raise ValueError(f"{self.post_id}: scores sum to {sum(self.scores)}, not 1")
        if self.argmax_label != argmax_emotion(self.scores):
            raise ValueError(f"{self.post_id}: label {self.argmax_label!r} is not the argmax")

    def score(self, emotion: str) -> float:
        return self.scores[EMOTIONS.index(emotion)]


@dataclass(frozen=True)
class CurveBucket:
    period: str
    mean_scores: tuple[float, ...]
    post_count: int


@dataclass(frozen=True)
class EmotionCurve:
    buckets: tuple[CurveBucket, ...]


@dataclass
class JoinManifest:
    labeled: int = 0
    unlabeled: int = 0
    orphan_labels: int = 0


def load_labels(path: str | Path) -> dict[str, EmotionLabel]:
    """Read the newline-delimited label file keyed by post id."""
    labels: dict[str, EmotionLabel] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            pid = str(obj["post_id"])
            if pid in labels:
                raise DuplicateLabel(f"duplicate label for post {pid}")
            labels[pid] = EmotionLabel(
                post_id=pid,
                scores=tuple(float(obj[e]) for e in EMOTIONS),
                argmax_label=str(obj["label"]),
            )
    return labels


def write_labels(path: str | Path, labels: Iterable[EmotionLabel]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for lab in labels:
            obj = {"post_id": lab.post_id}
            obj.update({e: lab.scores[i] for i, e in enumerate(EMOTIONS)})
            obj["label"] = lab.argmax_label
            fh.write(json.dumps(obj))
            fh.write("\n")


def join_labels(
    posts: Iterable[PostRecord], labels: dict[str, EmotionLabel]
) -> tuple[list[tuple[PostRecord, EmotionLabel]], JoinManifest]:
    """Inner join of posts with their labels; coverage gaps land in the manifest."""
    manifest = JoinManifest()
    joined: list[tuple[PostRecord, EmotionLabel]] = []
    seen_ids: set[str] = set()
    for post in posts:
        seen_ids.add(post.id)
        label = labels.get(post.id)
        if label is None:
            manifest.unlabeled += 1
            continue
        joined.append((post, label))
        manifest.labeled += 1
    manifest.orphan_labels = sum(1 for pid in labels if pid not in seen_ids)
    return joined, manifest


class EmotionTally:
    """Mergeable per-bucket sums; splitting a stream and merging tallies is lossless."""

    def __init__(self) -> None:
        self.count = 0
        self.sums = [0.0] * len(EMOTIONS)
        self.label_counts = [0] * len(EMOTIONS)

    def add(self, label: EmotionLabel) -> None:
        self.count += 1
        for i, s in enumerate(label.scores):
            self.sums[i] += s
        self.label_counts[EMOTIONS.index(label.argmax_label)] += 1

    def merge(self, other: "EmotionTally") -> None:
        self.count += other.count
        for i in range(len(EMOTIONS)):
            self.sums[i] += other.sums[i]
            self.label_counts[i] += other.label_counts[i]

    def means(self, mode: str = MODE_PROBABILITY) -> tuple[float, ...]:
        if self.count == 0:
            raise ValueError("empty tally has no means")
        if mode == MODE_PROBABILITY:
            return tuple(s / self.count for s in self.sums)
        if mode == MODE_LABEL_SHARE:
            return tuple(c / self.count for c in self.label_counts)
        raise ValueError(f"unknown mode {mode!r}")


def iso_week(post: PostRecord) -> str:
    year, week, _ = post.day().isocalendar()
    return f"{year:04d}-W{week:02d}"


def weekly_curve(
    joined: Iterable[tuple[PostRecord, EmotionLabel]],
    subreddit: str | None = None,
    mode: str = MODE_PROBABILITY,
) -> EmotionCurve:
    """Mean score of each emotion per ISO week, corpus-wide or for one subreddit."""
    tallies: dict[str, EmotionTally] = {}
    for post, label in joined:
        if subreddit is not None and post.subreddit != subreddit:
            continue
        week = iso_week(post)
        tally = tallies.get(week)
        if tally is None:
            tally = tallies[week] = EmotionTally()
        tally.add(label)
    buckets = tuple(
        CurveBucket(period=week, mean_scores=tallies[week].means(mode), post_count=tallies[week].count)
        for week in sorted(tallies)
    )
    return EmotionCurve(buckets=buckets)


@dataclass(frozen=True)
class SubredditEmotions:
    subreddit: str
    post_count: int
    means: tuple[float, ...]  # REPORTED order


@dataclass(frozen=True)
class SubredditSummary:
    rows: tuple[SubredditEmotions, ...]
    # emotion -> subreddit holding the extreme, over the reported rows
    highest: dict[str, str]
    lowest: dict[str, str]


def subreddit_summary(
    joined: Iterable[tuple[PostRecord, EmotionLabel]],
    top_n: int | None = None,
    mode: str = MODE_PROBABILITY,
) -> SubredditSummary:
    """Per-subreddit mean of the five reported emotions, with per-column extremes marked.

    Rows are ordered by post count (descending, names breaking ties); when
    ``top_n`` is given the extremes are taken over the reported rows only.
    """
    tallies: dict[str, EmotionTally] = {}
    for post, label in joined:
        tally = tallies.get(post.subreddit)
        if tally is None:
            tally = tallies[post.subreddit] = EmotionTally()
        tally.add(label)
    ordered = sorted(tallies.items(), key=lambda kv: (-kv[1].count, kv[0]))
    if top_n is not None:
        ordered = ordered[:top_n]
    rows = tuple(
        SubredditEmotions(
            subreddit=name,
            post_count=tally.count,
            means=tally.means(mode)[: len(REPORTED)],
        )
        for name, tally in ordered
    )
    highest: dict[str, str] = {}
    lowest: dict[str, str] = {}
    if rows:
        for i, emotion in enumerate(REPORTED):
            highest[emotion] = max(rows, key=lambda r: (r.means[i], r.subreddit)).subreddit
            lowest[emotion] = min(rows, key=lambda r: (r.means[i], r.subreddit)).subreddit
    return SubredditSummary(rows=rows, highest=highest, lowest=lowest)


@dataclass(frozen=True)
class EventEmotions:
    name: str
    month: str
    post_count: int
    means: tuple[float, ...]  # REPORTED order


def event_radar(
    joined: Iterable[tuple[PostRecord, EmotionLabel]],
    events: Sequence[tuple[str, str]],
    mode: str = MODE_PROBABILITY,
) -> tuple[EventEmotions, ...]:
    """Corpus-wide mean of each reported emotion over every event's month.

    Events are (name, "YYYY-MM") pairs; months with no posts are dropped with
    a warning rather than emitted as empty rows.
    """
    tallies: dict[str, EmotionTally] = {}
    for post, label in joined:
        month = post.month()
        tally = tallies.get(month)
        if tally is None:
            tally = tallies[month] = EmotionTally()
        tally.add(label)
    out: list[EventEmotions] = []
    for name, month in events:
        tally = tallies.get(month)
        if tally is None or tally.count == 0:
            log.warning("event %r: no posts in %s, omitted", name, month)
            continue
        out.append(
            EventEmotions(
                name=name,
                month=month,
                post_count=tally.count,
                means=tally.means(mode)[: len(REPORTED)],
            )
        )
    return tuple(out)
