"""Parsing and validation of post archives, price files, and coin registries."""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable

import yaml

from coinpulse.signal import DailySeries

KINDS = ("submission", "comment")


class CorruptArchive(Exception):
    """More than half of an archive's lines failed to parse."""


class InvalidBar(Exception):
    """Price bar with a non-positive close."""


class DuplicateBar(Exception):
    """Two price bars for the same (currency, date)."""


@dataclass(frozen=True)
class PostRecord:
    """One submission or comment from an archive.

    ``spam_score`` is an upstream per-post spam probability carried in the
    archive; it is optional and never computed here.
    """

    id: str
    author: str
    subreddit: str
    kind: str
    created_utc: int
    body: str
    title: str | None = None
    spam_score: float | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("post id must be non-empty")
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if not isinstance(self.created_utc, int) or self.created_utc <= 0:
            raise ValueError(f"created_utc must be a positive integer, got {self.created_utc!r}")
        if self.kind == "comment" and self.title is not None:
            raise ValueError("comments cannot carry a title")
        if self.spam_score is not None and not 0.0 <= self.spam_score <= 1.0:
            raise ValueError(f"spam_score outside [0,1]: {self.spam_score}")

    def text(self) -> str:
        """Matching/scoring text: title and body joined by one space for submissions."""
        if self.kind == "submission" and self.title:
            return f"{self.title} {self.body}" if self.body else self.title
        return self.body

    def day(self) -> date:
        return datetime.fromtimestamp(self.created_utc, tz=timezone.utc).date()

    def month(self) -> str:
        d = self.day()
        return f"{d.year:04d}-{d.month:02d}"

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "author": self.author,
            "subreddit": self.subreddit,
            "kind": self.kind,
            "created_utc": self.created_utc,
            "body": self.body,
        }
        if self.title is not None:
            out["title"] = self.title
        if self.spam_score is not None:
            out["spam_score"] = self.spam_score
        return out


@dataclass(frozen=True)
class PriceBar:
    """One daily close in quote-currency units."""

    date: date
    close: float

    def __post_init__(self) -> None:
        if self.close <= 0:
            raise InvalidBar(f"{self.date}: close {self.close} is not positive")


@dataclass
class IngestManifest:
    parsed: int = 0
    skipped: int = 0


def _from_native(obj: dict) -> PostRecord:
    return PostRecord(
        id=str(obj["id"]),
        author=str(obj["author"]),
        subreddit=str(obj["subreddit"]),
        kind=str(obj["kind"]),
        created_utc=int(obj["created_utc"]),
        body=str(obj.get("body", "")),
        title=None if obj.get("title") is None else str(obj["title"]),
        spam_score=None if obj.get("spam_score") is None else float(obj["spam_score"]),
    )


def _from_pushshift(obj: dict) -> PostRecord:
    # Pushshift dumps carry submissions with title/selftext and comments with body.
    is_submission = "title" in obj
    return PostRecord(
        id=str(obj["id"]),
        author=str(obj["author"]),
        subreddit=str(obj["subreddit"]),
        kind="submission" if is_submission else "comment",
        created_utc=int(obj["created_utc"]),
        body=str(obj.get("selftext", "") if is_submission else obj.get("body", "")),
        title=str(obj["title"]) if is_submission else None,
        spam_score=None if obj.get("spam_score") is None else float(obj["spam_score"]),
    )


_DIALECTS = {"native": _from_native, "pushshift": _from_pushshift}


def load_posts(path: str | Path, dialect: str = "native") -> tuple[list[PostRecord], IngestManifest]:
    """Parse a newline-delimited archive into validated records, in file order.

    Malformed lines (bad JSON, missing fields, invariant violations, and ids
    already seen in this file) are counted and skipped. If more than half of
    the non-blank lines are malformed the whole archive is rejected.
    """
    if dialect not in _DIALECTS:
        raise ValueError(f"unknown archive dialect {dialect!r}")
    adapt = _DIALECTS[dialect]
    records: list[PostRecord] = []
    manifest = IngestManifest()
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                rec = adapt(json.loads(line))
                if rec.id in seen:
                    raise ValueError(f"duplicate id {rec.id}")
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                manifest.skipped += 1
                continue
            seen.add(rec.id)
            records.append(rec)
            manifest.parsed += 1
    total = manifest.parsed + manifest.skipped
    if total > 0 and manifest.skipped > total / 2:
        raise CorruptArchive(
            f"{path}: {manifest.skipped}/{total} lines malformed"
        )
    return records, manifest


def write_posts(path: str | Path, records: Iterable[PostRecord]) -> None:
    """Serialize records back to the newline-delimited archive format."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), sort_keys=True))
            fh.write("\n")


def load_prices(path: str | Path, currency: str) -> DailySeries:
    """Read a ``date,close`` CSV into a dense daily close series.

    Interior missing days are forward-filled from the previous close and
    reported through the series' ``filled`` metadata.
    """
    bars: dict[date, PriceBar] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "date" not in reader.fieldnames or "close" not in reader.fieldnames:
            raise ValueError(f"{path}: expected header with date,close")
        for row in reader:
            bar = PriceBar(date=date.fromisoformat(row["date"].strip()), close=float(row["close"]))
            if bar.date in bars:
                raise DuplicateBar(f"{currency} {bar.date}: duplicate bar")
            bars[bar.date] = bar
    if not bars:
        return DailySeries(start_date=None, values=(), label=currency)
    start = min(bars)
    end = max(bars)
    values: list[float] = []
    filled: list[date] = []
    last = bars[start].close
    d = start
    while d <= end:
        if d in bars:
            last = bars[d].close
        else:
            filled.append(d)
        values.append(last)
        d += timedelta(days=1)
    return DailySeries(start_date=start, values=tuple(values), label=currency, filled=tuple(filled))


@dataclass(frozen=True)
class CoinEntry:
    canonical_name: str
    match_terms: tuple[str, ...]
    listing_date: date

    def __post_init__(self) -> None:
        if not self.match_terms:
            raise ValueError(f"{self.canonical_name}: match_terms must be non-empty")
        for term in self.match_terms:
            if not term or term != term.lower():
                raise ValueError(f"{self.canonical_name}: match terms must be lowercase, got {term!r}")


class CoinRegistry:
    """Name-matching vocabulary for the tracked currencies.

    Only names are matched, never ticker symbols: symbols collide with
    ordinary words far too often to be usable.
    """

    def __init__(self, entries: Iterable[CoinEntry], plural_suffix: bool = False):
        self.entries = tuple(entries)
        names = [e.canonical_name for e in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("canonical names must be unique")
        self.plural_suffix = plural_suffix
        suffix = "s?" if plural_suffix else ""
        self._patterns = tuple(
            (
                e.canonical_name,
                re.compile(
                    r"(?<![a-z0-9])"
                    + re.escape(term)
                    + suffix
                    + r"(?![a-z0-9])"
                ),
            )
            for e in self.entries
            for term in e.match_terms
        )

    def names(self) -> tuple[str, ...]:
        return tuple(e.canonical_name for e in self.entries)

    def entry(self, name: str) -> CoinEntry:
        for e in self.entries:
            if e.canonical_name == name:
                return e
        raise KeyError(name)


def load_registry(path: str | Path, plural_suffix: bool = False) -> CoinRegistry:
    """Load the coin registry from a YAML/JSON config file."""
    text = Path(path).read_text(encoding="utf-8")
    data = yaml.safe_load(text)
    raw = data["coins"] if isinstance(data, dict) else data
    entries = []
    for item in raw:
        listing = item["listing_date"]
        if isinstance(listing, str):
            listing = date.fromisoformat(listing)
        entries.append(
            CoinEntry(
                canonical_name=str(item["canonical_name"]),
                match_terms=tuple(str(t) for t in item["match_terms"]),
                listing_date=listing,
            )
        )
    return CoinRegistry(entries, plural_suffix=plural_suffix)


def match_mentions(post: PostRecord, registry: CoinRegistry) -> set[str]:
    """Canonical names of every currency the post mentions.

    Matching is case-insensitive on alphanumeric word boundaries; a post
    naming several currencies belongs to every one of their post sets.
    """
    text = post.text().lower()
    return {name for name, pattern in registry._patterns if pattern.search(text)}
