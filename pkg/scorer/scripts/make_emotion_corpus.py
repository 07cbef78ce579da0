#!/usr/bin/env python3
"""Generate a deterministic synthetic labeled emotion corpus (CSV text,label).

Desk-scale stand-in for the public emotion corpora, which are not fetchable
from an offline sandbox. Sentences pair class-bearing vocabulary with shared
filler so the task is learnable but not degenerate.
"""

from __future__ import annotations

import argparse
import csv
import random

CLASSES = ("joy", "sadness", "anger", "fear", "surprise", "neutral")

LEXICON = {
    "joy": [
        "happy", "thrilled", "delighted", "grateful", "wonderful", "amazing",
        "fantastic", "joyful", "excited", "blessed", "proud", "love it",
    ],
    "sadness": [
        "sad", "heartbroken", "miserable", "crying", "lonely", "hopeless",
        "depressed", "devastated", "mourning", "gutted", "defeated",
    ],
    "anger": [
        "angry", "furious", "outraged", "annoyed", "disgusted", "fed up",
        "livid", "infuriated", "betrayed", "sick of this", "done with it",
    ],
    "fear": [
        "scared", "terrified", "anxious", "worried", "nervous", "panicking",
        "afraid", "dreading it", "uneasy", "on edge", "alarmed",
    ],
    "surprise": [
        "surprised", "shocked", "stunned", "astonished", "speechless",
        "blindsided", "amazed it happened", "caught off guard", "floored",
    ],
}

EMOTION_TEMPLATES = [
    "i feel so {kw} about {topic} today",
    "this {topic} news made me {kw}",
    "honestly just {kw} right now after {topic}",
    "{kw} doesn't even begin to describe how i feel about {topic}",
    "reading about {topic} left me completely {kw}",
    "am i the only one {kw} about {topic}",
    "been {kw} all week because of {topic}",
    "that thread on {topic} has me {kw}",
]

NEUTRAL_TEMPLATES = [
    "the exchange posted its weekly {topic} update",
    "here is the schedule for the {topic} maintenance window",
    "fees for {topic} remain unchanged this month",
    "a summary of {topic} figures is attached",
    "the {topic} report covers the usual metrics",
    "reminder that the {topic} thread is posted every monday",
    "documentation for {topic} was moved to the wiki",
    "see the pinned post for {topic} details",
]

TOPICS = [
    "the market", "my portfolio", "the listing", "the merge", "trading",
    "the airdrop", "the fork", "staking", "the wallet", "the outage",
    "the roadmap", "the community", "mining", "the upgrade", "the charts",
]

FILLER = ["tbh", "ngl", "fwiw", "imo", "fr", "lol", ""]


def sentence(rng: random.Random, label: str) -> str:
    topic = rng.choice(TOPICS)
    if label == "neutral":
        text = rng.choice(NEUTRAL_TEMPLATES).format(topic=topic)
    else:
        text = rng.choice(EMOTION_TEMPLATES).format(kw=rng.choice(LEXICON[label]), topic=topic)
    tail = rng.choice(FILLER)
    if tail:
        text = f"{text} {tail}"
    if rng.random() < 0.08:
        text = f"{text} https://example.com/{rng.randrange(1000)}"
    if rng.random() < 0.3:
        text = text.capitalize()
    return text


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="emotion_corpus.csv")
    parser.add_argument("--per-class", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=13)
    args = parser.parse_args()
    rng = random.Random(args.seed)
    rows = [(sentence(rng, label), label) for label in CLASSES for _ in range(args.per_class)]
    rng.shuffle(rows)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["text", "label"])
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    import sys

    sys.exit(main())
