"""Final dataset assembly: canonical comment-free code, grouped splits."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace, asdict
from pathlib import Path

from ..lang import ParseError, parse, pretty, strip_comments
from .grounding import AUTO_ACCEPTED, REVIEWED_ACCEPTED, GroundingResult
from .profiles import EVAL, TRAIN, PromptProfile

ORIGINAL = "original"
AUGMENTED = "augmented"

ROW_FIELDS = ("id", "instruction", "code", "source", "base_task_id", "split",
              "provenance")


@dataclass(frozen=True)
class DatasetPair:
    id: str
    instruction: str
    code: str
    source: str  # original | augmented
    base_task_id: str
    split: str  # train | eval
    provenance: dict

    def to_row(self) -> dict:
        return asdict(self)


def assemble_pairs(
    groundings: list[GroundingResult],
    augmentations: dict[str, list[str]],
    profiles: dict[str, PromptProfile],
    model_ids: dict[str, str],
) -> list[DatasetPair]:
    """Join accepted groundings with their augmented instructions."""
    pairs: list[DatasetPair] = []
    for g in groundings:
        if g.status not in (AUTO_ACCEPTED, REVIEWED_ACCEPTED):
            continue
        split = profiles[g.profile_id].split if g.profile_id in profiles else TRAIN
        provenance = {
            "generator": model_ids.get("generator", ""),
            "grounder": model_ids.get("grounder", ""),
            "grounding": "human" if g.status == REVIEWED_ACCEPTED else "auto",
            "rounds": g.rounds_used,
        }
        pairs.append(
            DatasetPair(
                id=f"{g.instruction_id}-orig",
                instruction=g.instruction,
                code=g.code,
                source=ORIGINAL,
                base_task_id=g.instruction_id,
                split=split,
                provenance=provenance,
            )
        )
        for k, text in enumerate(augmentations.get(g.instruction_id, []), start=1):
            pairs.append(
                DatasetPair(
                    id=f"{g.instruction_id}-aug{k}",
                    instruction=text,
                    code=g.code,
                    source=AUGMENTED,
                    base_task_id=g.instruction_id,
                    split=split,
                    provenance={**provenance,
                                "augmenter": model_ids.get("augmenter", "")},
                )
            )
    return pairs


def _canonical_code(pair: DatasetPair) -> str:
    try:
        program = parse(strip_comments(pair.code))
    except ParseError as exc:
        raise ValueError(f"pair {pair.id}: code does not parse: {exc}") from exc
    return pretty(program)


def _grouped(pairs: list[DatasetPair]) -> dict[str, list[DatasetPair]]:
    groups: dict[str, list[DatasetPair]] = {}
    for p in pairs:
        groups.setdefault(p.base_task_id, []).append(p)
    return groups


def _split_by_sizes(
    pairs: list[DatasetPair], train_n: int, eval_n: int, seed: int
) -> tuple[list[DatasetPair], int]:
    """Seeded grouped split; returns pairs with split set and the deviation
    (requested eval size minus achieved) when group atomicity makes the
    exact sizes unattainable."""
    if train_n + eval_n != len(pairs):
        raise ValueError(
            f"split sizes {train_n}+{eval_n} != {len(pairs)} available pairs"
        )
    groups = _grouped(pairs)
    order = sorted(groups)
    random.Random(seed).shuffle(order)
    eval_ids: set[str] = set()
    eval_count = 0
    for base in order:
        size = len(groups[base])
        if eval_count + size <= eval_n:
            eval_ids.add(base)
            eval_count += size
        if eval_count == eval_n:
            break
    out = [
        replace(p, split=EVAL if p.base_task_id in eval_ids else TRAIN)
        for p in pairs
    ]
    return out, eval_n - eval_count


def build_dataset(
    pairs: list[DatasetPair],
    split_spec: dict,
    seed: int,
    outdir: str | Path,
) -> tuple[Path, Path, dict]:
    """Write train.jsonl / eval.jsonl and return them with a manifest dict.

    ``split_spec`` is ``{"mode": "by_profile"}`` (keep the split assigned at
    generation time) or ``{"mode": "sizes", "train": N, "eval": M}`` for a
    seeded split that never separates a base task from its augmentations.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    canonical = [replace(p, code=_canonical_code(p)) for p in pairs]
    for p in canonical:
        if "#" in p.code:
            raise ValueError(f"pair {p.id}: comment survived stripping")

    deviation = 0
    mode = split_spec.get("mode", "by_profile")
    if mode == "sizes":
        canonical, deviation = _split_by_sizes(
            canonical, int(split_spec["train"]), int(split_spec["eval"]), seed
        )
    elif mode != "by_profile":
        raise ValueError(f"unknown split mode {mode!r}")

    for base, group in _grouped(canonical).items():
        splits = {p.split for p in group}
        if len(splits) != 1:
            raise ValueError(f"base task {base} crosses splits: {splits}")

    canonical.sort(key=lambda p: p.id)
    train_path = outdir / "train.jsonl"
    eval_path = outdir / "eval.jsonl"
    counts = {"pairs": len(canonical), TRAIN: 0, EVAL: 0,
              ORIGINAL: 0, AUGMENTED: 0}
    with open(train_path, "w", encoding="utf-8") as train_fh, \
            open(eval_path, "w", encoding="utf-8") as eval_fh:
        for p in canonical:
            counts[p.split] += 1
            counts[p.source] += 1
            fh = train_fh if p.split == TRAIN else eval_fh
            fh.write(json.dumps(p.to_row(), ensure_ascii=False, sort_keys=True) + "\n")

    manifest_extra = {
        "split": {
            "mode": mode,
            "requested": (
                {"train": split_spec.get("train"), "eval": split_spec.get("eval")}
                if mode == "sizes" else None
            ),
            "achieved": {"train": counts[TRAIN], "eval": counts[EVAL]},
            "deviation": deviation,
        },
        "counts": counts,
    }
    return train_path, eval_path, manifest_extra


def load_pairs(path: str | Path) -> list[DatasetPair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            missing = [f for f in ROW_FIELDS if f not in row]
            if missing:
                raise ValueError(f"dataset row missing fields {missing}")
            pairs.append(DatasetPair(**{f: row[f] for f in ROW_FIELDS}))
    return pairs
