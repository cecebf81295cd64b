"""Supervised fine-tuning with the instruction masked from the loss."""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path

import torch

from .config import TrainConfig
from .data import batches, collate, load_dataset
from .model import (
    ModelConfig,
    TinyCausalLM,
    apply_lora,
    masked_lm_loss,
    trainable_parameters,
)

log = logging.getLogger(__name__)


class TrainingError(Exception):
    pass


def build_model(cfg: TrainConfig) -> TinyCausalLM:
    torch.manual_seed(cfg.seed)
    model = TinyCausalLM(ModelConfig(
        n_embd=cfg.n_embd, n_head=cfg.n_head, n_layer=cfg.n_layer,
        max_seq_len=cfg.max_seq_len,
    ))
    return apply_lora(model, cfg.lora_rank, cfg.lora_alpha)


def save_checkpoint(model: TinyCausalLM, cfg: TrainConfig, path: Path,
                    step: int) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(
        {"model_state": model.state_dict(), "config": cfg.__dict__, "step": step},
        path,
    )


def load_checkpoint(path: str | Path) -> tuple[TinyCausalLM, TrainConfig]:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    cfg = TrainConfig(**payload["config"])
    model = build_model(cfg)
    model.load_state_dict(payload["model_state"])
    return model, cfg


@torch.no_grad()
def evaluate(model: TinyCausalLM, pairs, cfg: TrainConfig) -> float:
    model.eval()
    losses = []
    for start in range(0, len(pairs), cfg.batch_size):
        ids, labels = collate(pairs[start:start + cfg.batch_size], cfg.max_seq_len)
        losses.append(float(masked_lm_loss(model(ids), labels)))
    model.train()
    return sum(losses) / len(losses)


def sft_train(
    cfg: TrainConfig,
    train_file: str | Path,
    eval_file: str | Path | None,
    outdir: str | Path,
) -> dict:
    """Train and return a summary; writes checkpoint + per-step loss log."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    train_pairs = load_dataset(train_file)
    eval_pairs = load_dataset(eval_file) if eval_file else None

    model = build_model(cfg)
    generator = torch.Generator().manual_seed(cfg.seed)
    optimizer = torch.optim.AdamW(
        trainable_parameters(model), lr=cfg.learning_rate, weight_decay=0.0
    )

    loss_log = outdir / "sft_loss.jsonl"
    checkpoint = outdir / "sft_checkpoint.pt"
    initial_loss = None
    final_loss = None
    step = 0
    with open(loss_log, "w", encoding="utf-8") as fh:
        for epoch in range(1, cfg.epochs + 1):
            for ids, labels in batches(train_pairs, cfg.batch_size,
                                       cfg.max_seq_len, generator):
                loss = masked_lm_loss(model(ids), labels)
                value = float(loss.detach())
                if not math.isfinite(value):
                    save_checkpoint(model, cfg, checkpoint, step)
                    raise TrainingError(
                        f"non-finite loss {value} at step {step} "
                        f"(epoch {epoch}); checkpoint saved to {checkpoint}"
                    )
                if initial_loss is None:
                    initial_loss = value
                final_loss = value
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                step += 1
                fh.write(json.dumps(
                    {"step": step, "epoch": epoch, "loss": round(value, 6)}
                ) + "\n")
            if eval_pairs:
                eval_loss = evaluate(model, eval_pairs, cfg)
                fh.write(json.dumps(
                    {"step": step, "epoch": epoch,
                     "eval_loss": round(eval_loss, 6)}
                ) + "\n")
                log.info("epoch %d: eval loss %.4f", epoch, eval_loss)

    save_checkpoint(model, cfg, checkpoint, step)
    return {
        "steps": step,
        "initial_loss": initial_loss,
        "final_loss": final_loss,
        "checkpoint": str(checkpoint),
        "loss_log": str(loss_log),
    }
