"""Classifier heads over text: a small built-in transformer encoder.

Pretrained checkpoints are not downloadable in every deployment, so the
default ``mini`` encoder is trained from scratch; any identifier other than
``mini`` is treated as unavailable here and rejected up front.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from emoscore import CLASSES

PAD, UNK = 0, 1


class ConfigError(Exception):
    """Scorer configuration or training data is unusable."""


@dataclass(frozen=True)
class ScorerConfig:
    base_model: str = "mini"
    max_tokens: int = 512
    classes: tuple[str, ...] = CLASSES
    epochs: int = 2
    test_fraction: float = 0.2
    seed: int = 0
    batch_size: int = 32
    learning_rate: float = 3e-4
    vocab_size: int = 20_000
    d_model: int = 128
    n_heads: int = 4
    n_layers: int = 2

    def __post_init__(self) -> None:
        if self.classes != CLASSES:
            raise ConfigError("classes are fixed to the six-emotion order")
        if not 1 <= self.max_tokens <= 512:
            raise ConfigError("max_tokens must be in [1, 512]")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must be in (0,1)")
        if self.base_model != "mini":
            raise ConfigError(
                f"encoder {self.base_model!r} is not available offline; use 'mini'"
            )


def build_vocab(token_lists: list[list[str]], size: int) -> dict[str, int]:
    counts: dict[str, int] = {}
    for tokens in token_lists:
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    vocab = {"<pad>": PAD, "<unk>": UNK}
    for tok, _ in ranked[: size - 2]:
        vocab[tok] = len(vocab)
    return vocab


def encode(tokens: list[str], vocab: dict[str, int], max_tokens: int) -> list[int]:
    ids = [vocab.get(tok, UNK) for tok in tokens[:max_tokens]]
    return ids or [UNK]  # empty text still needs one position


class MiniEncoder(nn.Module):
    """Two-layer transformer encoder with masked mean pooling."""

    def __init__(self, cfg: ScorerConfig, vocab_size: int):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, cfg.d_model, padding_idx=PAD)
        self.pos = nn.Embedding(cfg.max_tokens, cfg.d_model)
        layer = nn.TransformerEncoderLayer(
            d_model=cfg.d_model,
            nhead=cfg.n_heads,
            dim_feedforward=cfg.d_model * 2,
            dropout=0.1,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(
            layer, num_layers=cfg.n_layers, enable_nested_tensor=False
        )
        self.head = nn.Linear(cfg.d_model, len(CLASSES))

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        mask = ids.eq(PAD)
        positions = torch.arange(ids.size(1), device=ids.device).unsqueeze(0)
        x = self.embed(ids) + self.pos(positions)
        x = self.encoder(x, src_key_padding_mask=mask)
        keep = (~mask).unsqueeze(-1).float()
        pooled = (x * keep).sum(dim=1) / keep.sum(dim=1).clamp(min=1.0)
        return self.head(pooled)


def pad_batch(seqs: list[list[int]]) -> torch.Tensor:
    width = max(len(s) for s in seqs)
    return torch.tensor([s + [PAD] * (width - len(s)) for s in seqs], dtype=torch.long)


def save_artifact(path, model: MiniEncoder, vocab: dict[str, int], cfg: ScorerConfig, accuracy: float) -> None:
    torch.save(
        {
            "format": "emoscore-model/1",
            "config": cfg.__dict__,
            "vocab": vocab,
            "state": model.state_dict(),
            "test_accuracy": accuracy,
        },
        path,
    )


def load_artifact(path) -> tuple[MiniEncoder, dict[str, int], ScorerConfig, float]:
    blob = torch.load(path, map_location="cpu", weights_only=False)
    if blob.get("format") != "emoscore-model/1":
        raise ConfigError(f"{path}: not a scorer model artifact")
    cfg = ScorerConfig(**{k: tuple(v) if k == "classes" else v for k, v in blob["config"].items()})
    model = MiniEncoder(cfg, vocab_size=len(blob["vocab"]))
    model.load_state_dict(blob["state"])
    model.eval()
    return model, blob["vocab"], cfg, blob["test_accuracy"]
