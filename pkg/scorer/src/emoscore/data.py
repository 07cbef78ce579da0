"""Labeled-corpus loading, class mapping, and deterministic sampling."""

from __future__ import annotations

import csv
import json
import random
from pathlib import Path

import yaml

from emoscore import CLASSES
from emoscore.model import ConfigError


def load_mapping(path: str | Path) -> dict[str, str]:
    """Reviewable label-mapping config: raw label -> one of the six classes."""
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    mapping = {str(k).lower(): str(v).lower() for k, v in data["class_mapping"].items()}
    bad = sorted(set(mapping.values()) - set(CLASSES))
    if bad:
        raise ConfigError(f"mapping targets outside the six classes: {', '.join(bad)}")
    return mapping


def load_corpus(path: str | Path, mapping: dict[str, str] | None = None) -> list[tuple[str, str]]:
    """Read (text, label) pairs from a CSV (text,label header) or JSONL file.

    With a mapping, raw labels are translated first; rows whose label maps to
    nothing are dropped (that is how out-of-taxonomy classes are excluded).
    """
    path = Path(path)
    rows: list[tuple[str, str]] = []
    if path.suffix.lower() in (".jsonl", ".ndjson"):
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                rows.append((str(obj["text"]), str(obj["label"]).lower()))
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "text" not in reader.fieldnames or "label" not in reader.fieldnames:
                raise ConfigError(f"{path}: expected text,label columns")
            for row in reader:
                rows.append((row["text"], row["label"].lower()))
    if mapping is not None:
        rows = [(text, mapping[label]) for text, label in rows if label in mapping]
    unknown = sorted({label for _, label in rows} - set(CLASSES))
    if unknown:
        raise ConfigError(
            f"{path}: labels outside the six classes: {', '.join(unknown[:5])}"
            " (supply a mapping config)"
        )
    return rows


def sample_balanced(rows: list[tuple[str, str]], total: int, seed: int) -> list[tuple[str, str]]:
    """Deterministic class-balanced subsample of ``total`` rows."""
    per_class = total // len(CLASSES)
    rng = random.Random(seed)
    out: list[tuple[str, str]] = []
    for cls in CLASSES:
        pool = [r for r in rows if r[1] == cls]
        if len(pool) < per_class:
            raise ConfigError(f"class {cls!r}: only {len(pool)} rows, need {per_class}")
        out.extend(rng.sample(pool, per_class))
    rng.shuffle(out)
    return out


def train_test_split(
    rows: list[tuple[str, str]], test_fraction: float, seed: int
) -> tuple[list[tuple[str, str]], list[tuple[str, str]]]:
    shuffled = rows[:]
    random.Random(seed).shuffle(shuffled)
    n_test = max(1, int(round(len(shuffled) * test_fraction)))
    return shuffled[n_test:], shuffled[:n_test]
