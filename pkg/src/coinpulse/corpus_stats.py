"""User-level longitudinal statistics: spam exclusion, cohorts, retention, agreement."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from coinpulse.ingest import PostRecord

# Platform moderation bot, excluded from every user-level statistic.
AUTOMODERATOR = "AutoModerator"

CORPUS_SCOPE = "corpus"


class InvalidRatings(Exception):
    """Rating matrix rows do not share one rater count of at least two."""


class UndefinedKappa(Exception):
    """Chance agreement is exactly 1, so kappa has no defined value."""


@dataclass
class UserProfile:
    author: str
    post_count: int = 0
    spam_post_count: int = 0
    first_post_utc: int | None = None

    def add(self, post: PostRecord, spam: bool) -> None:
        self.post_count += 1
        if spam:
            self.spam_post_count += 1
        if self.first_post_utc is None or post.created_utc < self.first_post_utc:
            self.first_post_utc = post.created_utc

    def merge(self, other: "UserProfile") -> "UserProfile":
        firsts = [t for t in (self.first_post_utc, other.first_post_utc) if t is not None]
        return UserProfile(
            author=self.author,
            post_count=self.post_count + other.post_count,
            spam_post_count=self.spam_post_count + other.spam_post_count,
            first_post_utc=min(firsts) if firsts else None,
        )


@dataclass
class MonthlyCohort:
    month: str
    active_users: set[str] = field(default_factory=set)
    new_users: set[str] = field(default_factory=set)
    post_count: int = 0


def is_spam_post(post: PostRecord, threshold: float = 0.9) -> bool:
    """True only when a spam score is present and strictly above the threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold outside [0,1]: {threshold}")
    return post.spam_score is not None and post.spam_score > threshold


def build_profiles(
    posts: Iterable[PostRecord], spam_threshold: float = 0.9
) -> dict[str, UserProfile]:
    """Per-author tallies over the full corpus; shard tallies merge commutatively."""
    profiles: dict[str, UserProfile] = {}
    for post in posts:
        prof = profiles.get(post.author)
        if prof is None:
            prof = profiles[post.author] = UserProfile(author=post.author)
        prof.add(post, is_spam_post(post, spam_threshold))
    return profiles


def merge_profiles(
    a: Mapping[str, UserProfile], b: Mapping[str, UserProfile]
) -> dict[str, UserProfile]:
    out = {author: prof for author, prof in a.items()}
    for author, prof in b.items():
        out[author] = out[author].merge(prof) if author in out else prof
    return out


def filter_spam_users(
    profiles: Iterable[UserProfile], user_threshold: float = 0.5
) -> set[str]:
    """Authors whose share of spam posts is strictly above the threshold, plus the moderation bot."""
    if not 0.0 < user_threshold <= 1.0:
        raise ValueError(f"user_threshold outside (0,1]: {user_threshold}")
    excluded = {AUTOMODERATOR}
    for prof in profiles:
        if prof.post_count == 0:
            continue
        if prof.spam_post_count / prof.post_count > user_threshold:
            excluded.add(prof.author)
    return excluded


def exclude_authors(
    posts: Iterable[PostRecord], excluded: set[str]
) -> list[PostRecord]:
    return [p for p in posts if p.author not in excluded]


def monthly_activity(
    posts: Iterable[PostRecord], group_by: str = "corpus"
) -> dict[str, dict[str, MonthlyCohort]]:
    """Per-month post counts plus active and new user sets, keyed scope -> month.

    ``group_by="corpus"`` yields the single scope ``corpus`` with new-user
    status meaning first appearance anywhere; ``group_by="subreddit"`` keys by
    subreddit and counts first appearance within that subreddit. Spam
    exclusion is expected to have been applied already.
    """
    if group_by not in ("corpus", "subreddit"):
        raise ValueError(f"unknown group_by {group_by!r}")
    scopes: dict[str, dict[str, MonthlyCohort]] = {}
    # (scope, author) -> month of first appearance in that scope
    firsts: dict[tuple[str, str], str] = {}
    for post in posts:
        scope = CORPUS_SCOPE if group_by == "corpus" else post.subreddit
        month = post.month()
        months = scopes.setdefault(scope, {})
        cohort = months.get(month)
        if cohort is None:
            cohort = months[month] = MonthlyCohort(month=month)
        cohort.post_count += 1
        cohort.active_users.add(post.author)
        key = (scope, post.author)
        prior = firsts.get(key)
        if prior is None or month < prior:
            firsts[key] = month
    for (scope, author), month in firsts.items():
        scopes[scope][month].new_users.add(author)
    return {scope: dict(sorted(months.items())) for scope, months in sorted(scopes.items())}


def retention_overlap(a: set[str], b: set[str]) -> float:
    """Overlap coefficient |a n b| / min(|a|,|b|); zero when either set is empty."""
    if not a or not b:
        return 0.0
    return len(a & b) / min(len(a), len(b))


def fleiss_kappa(ratings: Sequence[Sequence[int]]) -> float:
    """Chance-corrected agreement for a fixed rater count over categorical labels.

    ``ratings[i][j]`` counts raters assigning subject i to category j; every
    row must sum to the same rater count n >= 2.
    """
    if not ratings:
        raise InvalidRatings("empty rating matrix")
    n_subjects = len(ratings)
    n_categories = len(ratings[0])
    if any(len(row) != n_categories for row in ratings):
        raise InvalidRatings("ragged rating matrix")
    n = sum(ratings[0])
    if n < 2:
        raise InvalidRatings(f"need at least 2 raters, got {n}")
    if any(sum(row) != n for row in ratings):
        raise InvalidRatings("rows must share one rater count")

    p_subject = [
        (sum(c * c for c in row) - n) / (n * (n - 1)) for row in ratings
    ]
    p_bar = sum(p_subject) / n_subjects
    totals = [sum(row[j] for row in ratings) for j in range(n_categories)]
    p_cat = [t / (n_subjects * n) for t in totals]
    p_e = sum(p * p for p in p_cat)
    if p_e == 1.0:
        raise UndefinedKappa("chance agreement is 1; kappa undefined")
    return (p_bar - p_e) / (1.0 - p_e)
