"""Dense time series, penalized changepoint segmentation, and lead-lag correlation."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta
from typing import TYPE_CHECKING, Iterable, NamedTuple

import numpy as np

if TYPE_CHECKING:
    from coinpulse.ingest import PostRecord


class DegenerateSeries(Exception):
    """Series carries no usable variation for the requested operation."""


class InvalidPenalty(Exception):
    """Segmentation penalty must be strictly positive."""


def month_index(d: date) -> int:
    return d.year * 12 + d.month - 1


def month_start(index: int) -> date:
    return date(index // 12, index % 12 + 1, 1)


@dataclass(frozen=True)
class DailySeries:
    """Gap-free series of one value per consecutive bucket (day or month).

    ``start_date`` is the first bucket (for monthly series, the first of the
    month). ``filled`` lists buckets whose value was forward-filled rather
    than observed. An empty series (no buckets, ``start_date=None``) is the
    result of aggregating an empty stream and is rejected by the analyses.
    """

    start_date: date | None
    values: tuple[float, ...]
    label: str = ""
    freq: str = "day"
    filled: tuple[date, ...] = ()

    def __post_init__(self) -> None:
        if self.freq not in ("day", "month"):
            raise ValueError(f"unknown freq {self.freq!r}")
        if self.values and self.start_date is None:
            raise ValueError("non-empty series requires a start_date")
        if self.freq == "month" and self.start_date is not None and self.start_date.day != 1:
            raise ValueError("monthly series must start on the first of a month")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end_date(self) -> date | None:
        if not self.values:
            return None
        return self.date_of(len(self.values) - 1)

    def date_of(self, i: int) -> date:
        assert self.start_date is not None
        if self.freq == "day":
            return self.start_date + timedelta(days=i)
        return month_start(month_index(self.start_date) + i)

    def index_of(self, d: date) -> int | None:
        """Bucket index of calendar day ``d``, or None when outside the span."""
        if not self.values:
            return None
        assert self.start_date is not None
        if self.freq == "day":
            i = (d - self.start_date).days
        else:
            i = month_index(d) - month_index(self.start_date)
        return i if 0 <= i < len(self.values) else None

    def value_on(self, d: date) -> float:
        i = self.index_of(d)
        if i is None:
            raise KeyError(f"{d} outside series {self.label!r}")
        return self.values[i]

    def dates(self) -> list[date]:
        return [self.date_of(i) for i in range(len(self.values))]

    def covers(self, start: date, end: date) -> bool:
        return self.index_of(start) is not None and self.index_of(end) is not None


@dataclass(frozen=True)
class ChangepointResult:
    """Segment boundaries minimizing L2 cost plus a per-changepoint penalty.

    ``breakpoints`` are exclusive segment ends, strictly increasing, never
    including the series length itself.
    """

    breakpoints: tuple[int, ...]
    penalty: float
    total_cost: float


@dataclass(frozen=True)
class LagCorrelation:
    lags: tuple[int, ...]
    coefficients: tuple[float, ...]
    best_lag: int
    best_coefficient: float


class LagReading(NamedTuple):
    relation: str  # posts_lead | price_leads | simultaneous
    days: int

    def __str__(self) -> str:
        if self.relation == "simultaneous":
            return "simultaneous"
        return f"{self.relation}({self.days})"


def normalize_max(s: DailySeries) -> DailySeries:
    """Divide every value by the series maximum (peak becomes 1 for non-negative data)."""
    if not s.values:
        raise DegenerateSeries(f"cannot normalize empty series {s.label!r}")
    m = max(s.values)
    if m == 0:
        raise DegenerateSeries(f"series {s.label!r} has zero maximum")
    return DailySeries(
        start_date=s.start_date,
        values=tuple(v / m for v in s.values),
        label=s.label,
        freq=s.freq,
        filled=s.filled,
    )


def aggregate(
    posts: Iterable["PostRecord"],
    granularity: str = "day",
    label: str = "",
) -> DailySeries:
    """Dense count series over the observed span, zero-filled where nothing was posted.

    Mention matching or subreddit grouping is expected to have been applied
    upstream; this only buckets whatever stream it is handed.
    """
    if granularity not in ("day", "month"):
        raise ValueError(f"unknown granularity {granularity!r}")
    counts: dict[int, int] = {}
    if granularity == "day":
        for p in posts:
            key = p.day().toordinal()
            counts[key] = counts.get(key, 0) + 1
    else:
        for p in posts:
            key = month_index(p.day())
            counts[key] = counts.get(key, 0) + 1
    if not counts:
        return DailySeries(start_date=None, values=(), label=label, freq=granularity)
    lo, hi = min(counts), max(counts)
    values = tuple(float(counts.get(i, 0)) for i in range(lo, hi + 1))
    start = date.fromordinal(lo) if granularity == "day" else month_start(lo)
    return DailySeries(start_date=start, values=values, label=label, freq=granularity)


def zscored(values: Iterable[float]) -> np.ndarray:
    """Standardize to zero mean / unit variance; constant input comes back as zeros."""
    arr = np.asarray(tuple(values), dtype=float)
    sd = arr.std()
    if sd == 0:
        return np.zeros_like(arr)
    return (arr - arr.mean()) / sd


def default_penalty(n: int) -> float:
    return 3.0 * float(np.log(n))


def _prefix_sums(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    px = np.concatenate(([0.0], np.cumsum(values)))
    px2 = np.concatenate(([0.0], np.cumsum(np.square(values))))
    return px, px2


def pelt(
    s: DailySeries | Iterable[float],
    penalty: float,
    cost: str = "l2_mean",
    min_size: int = 2,
) -> ChangepointResult:
    """Exact minimizer of total segment L2 cost plus ``penalty`` per changepoint.

    Candidate pruning is delayed by ``min_size`` steps so that the minimum
    segment length never invalidates the pruning argument: the result is
    identical to unpruned optimal partitioning, pruning only affects runtime.
    """
    if cost != "l2_mean":
        raise ValueError(f"unsupported cost {cost!r}")
    if penalty <= 0:
        raise InvalidPenalty(f"penalty must be > 0, got {penalty}")
    if min_size < 1:
        raise ValueError("min_size must be >= 1")
    values = np.asarray(s.values if isinstance(s, DailySeries) else tuple(s), dtype=float)
    n = len(values)
    if n < 2:
        raise ValueError("need at least 2 points to segment")
    px, px2 = _prefix_sums(values)

    def seg_cost(starts: np.ndarray, end: int) -> np.ndarray:
        tot = px[end] - px[starts]
        tot2 = px2[end] - px2[starts]
        return tot2 - tot * tot / (end - starts)

    f = np.empty(n + 1)
    f[0] = -penalty
    prev = np.zeros(n + 1, dtype=int)
    cands = [0]
    kill_at: dict[int, int] = {}
    for t in range(min_size, n + 1):
        new_tau = t - min_size
        if new_tau >= min_size:
            cands.append(new_tau)
        cands = [tau for tau in cands if kill_at.get(tau, n + 2) > t]
        arr = np.asarray(cands)
        path = f[arr] + seg_cost(arr, t)
        best = int(np.argmin(path))
        f[t] = path[best] + penalty
        prev[t] = arr[best]
        for tau, c in zip(cands, path):
            if c > f[t] and tau not in kill_at:
                kill_at[tau] = t + min_size

    bps: list[int] = []
    t = n
    while t > 0:
        tau = int(prev[t])
        if tau > 0:
            bps.append(tau)
        t = tau
    bps.reverse()
    return ChangepointResult(breakpoints=tuple(bps), penalty=penalty, total_cost=float(f[n]))


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    am = a - a.mean()
    bm = b - b.mean()
    denom = np.sqrt(np.dot(am, am) * np.dot(bm, bm))
    if denom == 0:
        return float("nan")
    return float(np.dot(am, bm) / denom)


def cross_correlate(
    posts: DailySeries,
    price: DailySeries,
    max_lag: int = 90,
    min_overlap: int = 30,
) -> LagCorrelation:
    """Pearson correlation of posts[t+lag] against price[t] for every lag in [-max_lag, max_lag].

    Series are aligned by calendar date, so a negative best lag means the
    posting series leads the price. Lags with fewer than ``min_overlap``
    paired days, or with a constant window on either side, are excluded.
    Ties on the peak go to the smallest |lag|, then to the negative lag.
    """
    if posts.freq != "day" or price.freq != "day":
        raise ValueError("cross-correlation expects daily series")
    if max_lag < 0:
        raise ValueError("max_lag must be >= 0")
    if not posts.values or not price.values:
        raise DegenerateSeries("cannot correlate an empty series")
    x = np.asarray(posts.values, dtype=float)
    y = np.asarray(price.values, dtype=float)
    assert posts.start_date is not None and price.start_date is not None
    delta = (price.start_date - posts.start_date).days

    found: dict[int, float] = {}
    for lag in range(-max_lag, max_lag + 1):
        off = delta + lag
        lo = max(0, -off)
        hi = min(len(y), len(x) - off)
        if hi - lo < min_overlap:
            continue
        r = _pearson(x[lo + off : hi + off], y[lo:hi])
        if np.isnan(r):
            continue
        found[lag] = float(np.clip(r, -1.0, 1.0))
    if not found:
        raise DegenerateSeries(
            f"no lag with >= {min_overlap} overlapping days and non-constant windows"
        )

    lags = tuple(sorted(found))
    coeffs = tuple(found[l] for l in lags)
    best_lag = None
    best_coef = -np.inf
    for lag in sorted(found, key=lambda l: (abs(l), l)):
        if found[lag] > best_coef:
            best_coef = found[lag]
            best_lag = lag
    assert best_lag is not None
    return LagCorrelation(
        lags=lags, coefficients=coeffs, best_lag=best_lag, best_coefficient=best_coef
    )


def interpret_lag(lc: LagCorrelation) -> LagReading:
    """Read the best lag as which signal moves first."""
    if lc.best_lag < 0:
        return LagReading("posts_lead", -lc.best_lag)
    if lc.best_lag > 0:
        return LagReading("price_leads", lc.best_lag)
    return LagReading("simultaneous", 0)
