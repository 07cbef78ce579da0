"""Run configuration: file loading, CLI overrides, validation, and hashing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields
from datetime import date
from pathlib import Path

import yaml


class ConfigError(Exception):
    """Configuration is unusable; the run exits with status 2."""


@dataclass
class RunConfig:
    posts: list[Path] = field(default_factory=list)
    prices_dir: Path | None = None
    registry: Path | None = None
    labels: Path | None = None
    out: Path = Path("out")
    archive_dialect: str = "native"
    coins: list[str] | None = None
    subreddits: list[str] | None = None
    top_subreddits: int = 15
    # spam handling
    spam_filter: bool = True
    spam_score_threshold: float = 0.9
    spam_user_threshold: float = 0.5
    # mention matching
    plural_suffix: bool = False
    # changepoints
    penalty: float | None = None
    granularity: str = "month"
    changepoint_series: str = "both"
    # cross-correlation
    max_lag: int = 90
    min_overlap: int = 30
    # backtest
    fee_rate: float = 0.001
    initial_cash: float = 1_000_000.0
    k: int | None = None
    start: date | None = None
    end: date | None = None
    write_ledgers: bool = False
    # emotions
    emotion_mode: str = "probability"
    events: list[tuple[str, str]] = field(default_factory=list)
    # execution only; never part of the config hash
    threads: int = 1

    def validate(self, need_labels: bool = False) -> None:
        if not self.posts:
            raise ConfigError("no post archives configured")
        for p in self.posts:
            if not p.is_file():
                raise ConfigError(f"post archive not found: {p}")
        if self.registry is None or not self.registry.is_file():
            raise ConfigError(f"registry not found: {self.registry}")
        if self.prices_dir is not None and not self.prices_dir.is_dir():
            raise ConfigError(f"prices directory not found: {self.prices_dir}")
        if self.labels is not None and not self.labels.is_file():
            raise ConfigError(f"label file not found: {self.labels}")
        if need_labels and self.labels is None:
            raise ConfigError("this analysis needs a label file; none configured")
        if self.archive_dialect not in ("native", "pushshift"):
            raise ConfigError(f"unknown archive dialect {self.archive_dialect!r}")
        if not 0.0 <= self.spam_score_threshold <= 1.0:
            raise ConfigError("spam_score_threshold must be in [0,1]")
        if not 0.0 < self.spam_user_threshold <= 1.0:
            raise ConfigError("spam_user_threshold must be in (0,1]")
        if self.penalty is not None and self.penalty <= 0:
            raise ConfigError("penalty must be > 0")
        if self.granularity not in ("day", "month"):
            raise ConfigError(f"unknown granularity {self.granularity!r}")
        if self.changepoint_series not in ("activity", "price", "both"):
            raise ConfigError(f"unknown changepoint series {self.changepoint_series!r}")
        if self.max_lag < 0:
            raise ConfigError("max_lag must be >= 0")
        if self.min_overlap < 2:
            raise ConfigError("min_overlap must be >= 2")
        if not 0.0 <= self.fee_rate < 1.0:
            raise ConfigError("fee_rate must be in [0,1)")
        if self.initial_cash <= 0:
            raise ConfigError("initial_cash must be > 0")
        if self.k is not None and self.k < 0:
            raise ConfigError("k must be >= 0")
        if self.start is not None and self.end is not None and self.start >= self.end:
            raise ConfigError("start must precede end")
        if self.emotion_mode not in ("probability", "label_share"):
            raise ConfigError(f"unknown emotion_mode {self.emotion_mode!r}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        for name, month in self.events:
            if len(month) != 7 or month[4] != "-":
                raise ConfigError(f"event {name!r}: month must be YYYY-MM, got {month!r}")

    def hash(self) -> str:
        """Digest of the analytic configuration; out dir and thread count excluded."""
        payload = {}
        for f in fields(self):
            if f.name in ("out", "threads"):
                continue
            payload[f.name] = getattr(self, f.name)
        blob = json.dumps(payload, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def _as_date(value) -> date:
    if isinstance(value, date):
        return value
    return date.fromisoformat(str(value))


def load_config(path: str | Path) -> RunConfig:
    """Parse the YAML run config, resolving relative paths against its directory."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    base = path.parent
    cfg = RunConfig()

    def respath(v) -> Path:
        p = Path(str(v))
        return p if p.is_absolute() else base / p

    known = {f.name for f in fields(RunConfig)}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
    if "posts" in data:
        raw = data["posts"]
        cfg.posts = [respath(v) for v in (raw if isinstance(raw, list) else [raw])]
    for key in ("prices_dir", "registry", "labels", "out"):
        if key in data and data[key] is not None:
            setattr(cfg, key, respath(data[key]))
    for key in ("coins", "subreddits"):
        if key in data and data[key] is not None:
            setattr(cfg, key, [str(v) for v in data[key]])
    for key in (
        "archive_dialect",
        "granularity",
        "changepoint_series",
        "emotion_mode",
    ):
        if key in data:
            setattr(cfg, key, str(data[key]))
    for key in ("spam_filter", "plural_suffix", "write_ledgers"):
        if key in data:
            setattr(cfg, key, bool(data[key]))
    for key in ("top_subreddits", "max_lag", "min_overlap", "threads"):
        if key in data:
            setattr(cfg, key, int(data[key]))
    for key in (
        "spam_score_threshold",
        "spam_user_threshold",
        "fee_rate",
        "initial_cash",
    ):
        if key in data:
            setattr(cfg, key, float(data[key]))
    if "penalty" in data and data["penalty"] is not None:
        cfg.penalty = float(data["penalty"])
    if "k" in data and data["k"] is not None:
        cfg.k = int(data["k"])
    for key in ("start", "end"):
        if key in data and data[key] is not None:
            setattr(cfg, key, _as_date(data[key]))
    if "events" in data and data["events"] is not None:
        cfg.events = [(str(e["name"]), str(e["month"])) for e in data["events"]]
    return cfg
