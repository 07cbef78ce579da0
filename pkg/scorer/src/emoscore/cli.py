"""Command-line entry point: train a classifier, score archives."""

from __future__ import annotations

import argparse
import sys

from emoscore.data import load_corpus, load_mapping, sample_balanced
from emoscore.infer import score_posts
from emoscore.model import ConfigError, ScorerConfig, load_artifact, save_artifact
from emoscore.train import fine_tune


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emoscore", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="fine-tune on a labeled corpus")
    train.add_argument("--data", required=True, help="CSV (text,label) or JSONL corpus")
    train.add_argument("--out", required=True, help="model artifact path")
    train.add_argument("--mapping", help="YAML mapping from raw labels to the six classes")
    train.add_argument("--sample-size", type=int, help="balanced subsample size")
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--max-tokens", type=int, default=512)
    train.add_argument("--epochs", type=int, default=2)
    train.add_argument("--base", default="mini", help="encoder identifier")

    score = sub.add_parser("score", help="emit a label file for a post archive")
    score.add_argument("--posts", required=True, help="newline-delimited post archive")
    score.add_argument("--model", required=True, help="trained artifact")
    score.add_argument("--out", required=True, help="label file to write")
    score.add_argument("--batch-size", type=int, default=64)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            mapping = load_mapping(args.mapping) if args.mapping else None
            rows = load_corpus(args.data, mapping)
            if args.sample_size:
                rows = sample_balanced(rows, args.sample_size, args.seed)
            cfg = ScorerConfig(
                base_model=args.base,
                max_tokens=args.max_tokens,
                epochs=args.epochs,
                seed=args.seed,
            )
            artifact, accuracy = fine_tune(rows, cfg)
            save_artifact(args.out, artifact["model"], artifact["vocab"], cfg, accuracy)
            print(f"trained on {len(rows)} rows; test accuracy {accuracy:.4f}; saved {args.out}")
        else:
            model, vocab, cfg, _ = load_artifact(args.model)
            manifest = score_posts(
                args.posts, model, vocab, cfg, args.out, batch_size=args.batch_size
            )
            print(
                f"scored {manifest.scored} posts "
                f"({manifest.empty_text} empty after cleanup, "
                f"{manifest.skipped_lines} malformed lines skipped) -> {args.out}"
            )
    except ConfigError as exc:
        print(f"emoscore: config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"emoscore: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
