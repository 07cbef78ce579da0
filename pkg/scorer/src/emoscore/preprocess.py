"""Text normalization shared by training and inference."""

from __future__ import annotations

import re

URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
TOKEN_RE = re.compile(r"[a-z0-9']+")


def tokenize(text: str) -> list[str]:
    return TOKEN_RE.findall(text.lower())


def preprocess(text: str, max_tokens: int = 512) -> str:
    """Strip URLs, lowercase, and truncate to the first ``max_tokens`` tokens.

    Idempotent: a second pass over its own output changes nothing.
    """
    cleaned = URL_RE.sub(" ", text)
    tokens = tokenize(cleaned)[:max_tokens]
    return " ".join(tokens)
