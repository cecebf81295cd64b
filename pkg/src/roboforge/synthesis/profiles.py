"""Prompt profiles: which system prompt asks for how many tasks of what kind."""

from __future__ import annotations

from dataclasses import dataclass

from ..templates import load_template

SIMPLE = "simple"
COMPLEX = "complex"
TRAIN = "train"
EVAL = "eval"


@dataclass(frozen=True)
class PromptProfile:
    id: str
    system_prompt: str
    requested_counts: tuple[tuple[str, int], ...]  # (pattern, n)
    complexity_class: str
    split: str = TRAIN
    augmentations_per_task: int = 2

    def __post_init__(self):
        if not self.system_prompt.strip():
            raise ValueError("system prompt must be non-empty")
        if self.complexity_class not in (SIMPLE, COMPLEX):
            raise ValueError(f"unknown complexity class {self.complexity_class!r}")
        if self.split not in (TRAIN, EVAL):
            raise ValueError(f"unknown split {self.split!r}")
        for pattern, n in self.requested_counts:
            if n <= 0:
                raise ValueError(f"requested count for {pattern!r} must be positive")
        if self.augmentations_per_task < 0:
            raise ValueError("augmentations_per_task must be >= 0")


def default_profiles() -> dict[str, PromptProfile]:
    """The four stock profiles: simple/complex crossed with train/eval."""
    simple_prompt = load_template("instructions_simple")
    complex_prompt = load_template("instructions_complex")
    profiles = (
        PromptProfile(
            id="simple-train",
            system_prompt=simple_prompt,
            requested_counts=(("plain", 110), ("yz_plane", 12)),
            complexity_class=SIMPLE,
            split=TRAIN,
        ),
        PromptProfile(
            id="complex-train",
            system_prompt=complex_prompt,
            requested_counts=(("square", 42),),
            complexity_class=COMPLEX,
            split=TRAIN,
        ),
        PromptProfile(
            id="simple-eval",
            system_prompt=simple_prompt,
            requested_counts=(("plain", 28),),
            complexity_class=SIMPLE,
            split=EVAL,
        ),
        PromptProfile(
            id="complex-eval",
            system_prompt=complex_prompt,
            requested_counts=(("square", 11),),
            complexity_class=COMPLEX,
            split=EVAL,
            augmentations_per_task=1,
        ),
    )
    return {p.id: p for p in profiles}
