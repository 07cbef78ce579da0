"""Batch scoring of post archives into the label-file contract."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch

from emoscore import CLASSES
from emoscore.model import MiniEncoder, ScorerConfig, encode, pad_batch
from emoscore.preprocess import preprocess, tokenize

# Convention for posts whose text is empty after cleanup.
EMPTY_TEXT_SCORES = (0.02, 0.02, 0.02, 0.02, 0.02, 0.9)


@dataclass
class ScoreManifest:
    scored: int = 0
    empty_text: int = 0
    skipped_lines: int = 0


def read_archive_texts(path: str | Path) -> tuple[list[tuple[str, str]], int]:
    """(post_id, text) pairs from a newline-delimited post archive, in file order.

    Submissions contribute title and body joined by a space; malformed lines
    are skipped and counted, matching the archive contract.
    """
    out: list[tuple[str, str]] = []
    skipped = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                pid = str(obj["id"])
                if not pid:
                    raise ValueError("empty id")
                body = str(obj.get("body", ""))
                title = obj.get("title")
                text = f"{title} {body}".strip() if title else body
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                skipped += 1
                continue
            out.append((pid, text))
    return out, skipped


@torch.no_grad()
def score_posts(
    posts_path: str | Path,
    model: MiniEncoder,
    vocab: dict[str, int],
    cfg: ScorerConfig,
    out_path: str | Path,
    batch_size: int = 64,
) -> ScoreManifest:
    """One label record per parsed post, written in input order."""
    torch.set_num_threads(1)
    model.eval()
    posts, skipped = read_archive_texts(posts_path)
    manifest = ScoreManifest(skipped_lines=skipped)

    records: list[dict] = []
    pending: list[tuple[int, list[int]]] = []  # (record slot, token ids)
    for pid, text in posts:
        cleaned = preprocess(text, cfg.max_tokens)
        slot = len(records)
        if not cleaned:
            manifest.empty_text += 1
            records.append(_record(pid, EMPTY_TEXT_SCORES))
            continue
        records.append({"post_id": pid})  # placeholder until its batch runs
        pending.append((slot, encode(tokenize(cleaned), vocab, cfg.max_tokens)))

    ids_by_slot = {slot: pid for slot, pid in ((s, records[s]["post_id"]) for s, _ in pending)}
    for lo in range(0, len(pending), batch_size):
        chunk = pending[lo : lo + batch_size]
        ids = pad_batch([seq for _, seq in chunk])
        probs = torch.softmax(model(ids), dim=1)
        for (slot, _), row in zip(chunk, probs):
            records[slot] = _record(ids_by_slot[slot], tuple(float(v) for v in row))

    manifest.scored = len(records)
    with open(out_path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec))
            fh.write("\n")
    return manifest


def _record(pid: str, scores: tuple[float, ...]) -> dict:
    out: dict = {"post_id": pid}
    for cls, value in zip(CLASSES, scores):
        out[cls] = value
    best = 0
    for i in range(1, len(CLASSES)):
        if scores[i] > scores[best]:
            best = i
    out["label"] = CLASSES[best]
    return out
