from __future__ import annotations

import json
import random
import sys
from pathlib import Path

import pytest

SCORER_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(SCORER_ROOT / "scripts"))

from make_emotion_corpus import CLASSES, sentence  # noqa: E402


def make_corpus(seed: int, per_class: int) -> list[tuple[str, str]]:
    rng = random.Random(seed)
    rows = [(sentence(rng, label), label) for label in CLASSES for _ in range(per_class)]
    rng.shuffle(rows)
    return rows


@pytest.fixture(scope="session")
def balanced_3000() -> list[tuple[str, str]]:
    return make_corpus(seed=13, per_class=500)


@pytest.fixture(scope="session")
def trained(balanced_3000):
    """One desk-scale fine-tune shared by the whole session."""
    from emoscore.model import ScorerConfig
    from emoscore.train import fine_tune

    cfg = ScorerConfig(seed=7, epochs=2)
    artifact, accuracy = fine_tune(balanced_3000, cfg)
    return artifact, accuracy, cfg


def write_archive(path: Path, n: int = 100, seed: int = 3) -> Path:
    """Post-archive fixture in the engine's newline-delimited format."""
    rng = random.Random(seed)
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(n):
            kind = "submission" if rng.random() < 0.3 else "comment"
            rec = {
                "id": f"post{i:04d}",
                "author": f"user{i % 11}",
                "subreddit": "coin_plaza",
                "kind": kind,
                "created_utc": 1_612_137_600 + i * 3600,
            }
            text = sentence(rng, rng.choice(CLASSES))
            if kind == "submission":
                rec["title"] = text
                rec["body"] = "" if rng.random() < 0.5 else sentence(rng, "neutral")
            else:
                rec["body"] = text
            fh.write(json.dumps(rec) + "\n")
    return path
