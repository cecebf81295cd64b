"""Dataset JSONL loading with row-schema validation and SFT batching."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch

from .tokenizer import PAD, encode_pair

ROW_FIELDS = ("id", "instruction", "code", "source", "base_task_id", "split",
              "provenance")


class SchemaViolation(Exception):
    """A dataset row does not conform to the published schema."""


@dataclass(frozen=True)
class Pair:
    id: str
    instruction: str
    code: str


def load_dataset(path: str | Path) -> list[Pair]:
    """Read dataset rows, aborting on the first schema violation."""
    pairs: list[Pair] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            missing = [f for f in ROW_FIELDS if f not in row]
            if missing:
                raise SchemaViolation(f"{path}:{lineno}: missing fields {missing}")
            if not isinstance(row["instruction"], str) or not row["instruction"].strip():
                raise SchemaViolation(f"{path}:{lineno}: empty instruction")
            if not isinstance(row["code"], str) or not row["code"].strip():
                raise SchemaViolation(f"{path}:{lineno}: empty code")
            pairs.append(Pair(row["id"], row["instruction"], row["code"]))
    if not pairs:
        raise SchemaViolation(f"{path}: no rows")
    return pairs


def collate(pairs: list[Pair], max_len: int) -> tuple[torch.Tensor, torch.Tensor]:
    """Right-padded (ids, labels) batch; padding is ignored by the loss."""
    encoded = [encode_pair(p.instruction, p.code, max_len) for p in pairs]
    width = max(len(ids) for ids, _ in encoded)
    batch_ids = torch.full((len(encoded), width), PAD, dtype=torch.long)
    batch_labels = torch.full((len(encoded), width), -100, dtype=torch.long)
    for i, (ids, labels) in enumerate(encoded):
        batch_ids[i, : len(ids)] = torch.tensor(ids, dtype=torch.long)
        batch_labels[i, : len(labels)] = torch.tensor(labels, dtype=torch.long)
    return batch_ids, batch_labels


def batches(pairs: list[Pair], batch_size: int, max_len: int, generator):
    """Shuffled epoch of collated batches."""
    order = torch.randperm(len(pairs), generator=generator).tolist()
    for start in range(0, len(order), batch_size):
        chunk = [pairs[i] for i in order[start:start + batch_size]]
        yield collate(chunk, max_len)
