"""Training configuration from a single YAML file."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

import yaml


@dataclass
class TrainConfig:
    base_model: str = "toy-byte-lm"
    n_embd: int = 64
    n_head: int = 2
    n_layer: int = 2
    lora_rank: int = 16
    lora_alpha: float = 32.0
    learning_rate: float = 1e-2
    epochs: int = 2
    batch_size: int = 4
    max_seq_len: int = 384
    group_size: int = 8
    temperature: float = 0.7
    max_new_tokens: int = 96
    grpo_learning_rate: float = 1e-4
    kl_coef: float = 0.0
    clip_eps: float = 0.2
    robot_profile: str = "uav"
    reward_url: str = "http://127.0.0.1:8700"
    reward_retries: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.group_size < 2:
            raise ValueError("GRPO group size must be >= 2")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.lora_rank < 1:
            raise ValueError("lora_rank must be >= 1")


def load_config(path: str | Path | None, **overrides) -> TrainConfig:
    data: dict = {}
    if path is not None:
        loaded = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ValueError(f"{path}: config must be a mapping")
        data.update(loaded)
    data.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(TrainConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return TrainConfig(**data)
