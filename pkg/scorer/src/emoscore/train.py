"""Fine-tuning loop and held-out evaluation."""

from __future__ import annotations

import random

import torch
from torch import nn

from emoscore import CLASSES
from emoscore.data import train_test_split
from emoscore.model import ConfigError, MiniEncoder, ScorerConfig, build_vocab, encode, pad_batch
from emoscore.preprocess import preprocess, tokenize


def _seed_everything(seed: int) -> None:
    random.seed(seed)
    torch.manual_seed(seed)
    torch.set_num_threads(1)  # keeps runs bit-reproducible across invocations


def _batches(n: int, size: int):
    for lo in range(0, n, size):
        yield range(lo, min(lo + size, n))


@torch.no_grad()
def evaluate(model: MiniEncoder, encoded: list[list[int]], labels: list[int], batch_size: int) -> float:
    model.eval()
    hits = 0
    for idx in _batches(len(encoded), batch_size):
        ids = pad_batch([encoded[i] for i in idx])
        pred = model(ids).argmax(dim=1)
        hits += sum(int(pred[j]) == labels[i] for j, i in enumerate(idx))
    return hits / len(encoded)


def fine_tune(rows: list[tuple[str, str]], cfg: ScorerConfig) -> tuple[dict, float]:
    """Train on an 80/20 split of (text, label) rows; returns (artifact dict, test accuracy).

    Every one of the six classes must appear in the training portion.
    """
    _seed_everything(cfg.seed)
    prepped = [(preprocess(text, cfg.max_tokens), label) for text, label in rows]
    train_rows, test_rows = train_test_split(prepped, cfg.test_fraction, cfg.seed)
    present = {label for _, label in train_rows}
    missing = sorted(set(CLASSES) - present)
    if missing:
        raise ConfigError(f"classes absent from training data: {', '.join(missing)}")

    train_tokens = [tokenize(text) for text, _ in train_rows]
    vocab = build_vocab(train_tokens, cfg.vocab_size)
    x_train = [encode(t, vocab, cfg.max_tokens) for t in train_tokens]
    y_train = [CLASSES.index(label) for _, label in train_rows]
    x_test = [encode(tokenize(text), vocab, cfg.max_tokens) for text, _ in test_rows]
    y_test = [CLASSES.index(label) for _, label in test_rows]

    model = MiniEncoder(cfg, vocab_size=len(vocab))
    optimizer = torch.optim.AdamW(model.parameters(), lr=cfg.learning_rate)
    loss_fn = nn.CrossEntropyLoss()
    order = list(range(len(x_train)))
    shuffle_rng = random.Random(cfg.seed + 1)
    for epoch in range(cfg.epochs):
        model.train()
        shuffle_rng.shuffle(order)
        for idx in _batches(len(order), cfg.batch_size):
            batch = [order[i] for i in idx]
            ids = pad_batch([x_train[i] for i in batch])
            target = torch.tensor([y_train[i] for i in batch], dtype=torch.long)
            optimizer.zero_grad()
            loss = loss_fn(model(ids), target)
            loss.backward()
            optimizer.step()

    accuracy = evaluate(model, x_test, y_test, cfg.batch_size)
    artifact = {"model": model, "vocab": vocab, "config": cfg}
    return artifact, accuracy
