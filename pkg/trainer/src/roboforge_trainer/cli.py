"""Trainer CLI: `sft` and `grpo` subcommands."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import load_config
from .data import SchemaViolation
from .grpo import grpo_train
from .reward_client import RewardServiceError
from .sft import TrainingError, sft_train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roboforge-train",
        description="LoRA SFT and GRPO over roboforge dataset files.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sft", help="supervised fine-tuning")
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--train", required=True, help="train JSONL")
    p.add_argument("--eval", help="eval JSONL")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)

    p = sub.add_parser("grpo", help="policy optimization against the reward service")
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--checkpoint", required=True, help="SFT checkpoint")
    p.add_argument("--train", required=True, help="train JSONL")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--reward-url")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "sft":
            cfg = load_config(args.config, seed=args.seed, epochs=args.epochs)
            summary = sft_train(cfg, args.train, args.eval, args.out)
        else:
            cfg = load_config(args.config, seed=args.seed,
                              reward_url=args.reward_url)
            summary = grpo_train(cfg, args.checkpoint, args.train, args.out,
                                 steps=args.steps)
        print(json.dumps(summary, indent=2))
        return 0
    except (SchemaViolation, TrainingError, RewardServiceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
