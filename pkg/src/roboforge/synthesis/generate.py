"""Instruction set generation with lexical policy filtering."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, asdict

from ..llm import ChatClient
from .profiles import COMPLEX, PromptProfile

log = logging.getLogger(__name__)

DEFAULT_RETRY_BUDGET = 3

# "5 meters", "5-meter sides", "5 m"
_DISTANCE = re.compile(r"(\d+(?:\.\d+)?)[ -]?(?:meters?\b|m\b)", re.IGNORECASE)
_ROTATION = re.compile(r"(\d+(?:\.\d+)?)\s*degrees?\b", re.IGNORECASE)
_LINE_MARKER = re.compile(r"^\s*(?:[-*•]+|\(?\d+[.)]:?)\s+")


def policy_violations(text: str) -> list[str]:
    """Lexical checks: distances integer and strictly inside (2, 10) meters,
    rotations divisible by 30 degrees."""
    problems = []
    for token in _DISTANCE.findall(text):
        value = float(token)
        if not value.is_integer():
            problems.append(f"distance {token} m is not an integer")
        elif not 2 < value < 10:
            problems.append(f"distance {token} m outside (2, 10)")
    for token in _ROTATION.findall(text):
        value = float(token)
        if not value.is_integer() or int(value) % 30 != 0:
            problems.append(f"rotation {token} degrees not divisible by 30")
    return problems


def parse_instruction_lines(completion: str) -> list[str]:
    """One instruction per line; enumeration markers stripped."""
    lines = []
    for raw in completion.splitlines():
        text = _LINE_MARKER.sub("", raw).strip()
        if text:
            lines.append(text)
    return lines


@dataclass(frozen=True)
class InstructionRecord:
    id: str
    text: str
    profile_id: str
    complexity_class: str
    needs_human_review: bool

    def __post_init__(self):
        if self.needs_human_review != (self.complexity_class == COMPLEX):
            raise ValueError("needs_human_review must track the complexity class")

    def to_row(self) -> dict:
        return asdict(self)

    @classmethod
    def from_row(cls, row: dict) -> "InstructionRecord":
        return cls(
            id=row["id"],
            text=row["text"],
            profile_id=row["profile_id"],
            complexity_class=row["complexity_class"],
            needs_human_review=bool(row["needs_human_review"]),
        )


def generate_instructions(
    profile: PromptProfile,
    client: ChatClient,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
) -> list[InstructionRecord]:
    """Ask the model for each requested (pattern, count) batch.

    Lines failing the lexical policy are rejected and logged; the model is
    re-prompted for the shortfall until the budget runs out, after which a
    partial result is returned with a warning.
    """
    records: list[InstructionRecord] = []
    seq = 0
    for pattern, wanted in profile.requested_counts:
        accepted = 0
        for attempt in range(1, retry_budget + 1):
            remaining = wanted - accepted
            if remaining <= 0:
                break
            user = f'Produce {remaining} task instructions for pattern "{pattern}".'
            if attempt > 1:
                user += f" This is attempt {attempt}; provide different tasks."
            completion = client.complete(
                [
                    {"role": "system", "content": profile.system_prompt},
                    {"role": "user", "content": user},
                ]
            )
            for line in parse_instruction_lines(completion):
                if accepted >= wanted:
                    break
                problems = policy_violations(line)
                if problems:
                    log.warning(
                        "rejected instruction (%s): %s", "; ".join(problems), line
                    )
                    continue
                seq += 1
                records.append(
                    InstructionRecord(
                        id=f"{profile.id}-{seq:04d}",
                        text=line,
                        profile_id=profile.id,
                        complexity_class=profile.complexity_class,
                        needs_human_review=profile.complexity_class == COMPLEX,
                    )
                )
                accepted += 1
        if accepted < wanted:
            log.warning(
                "profile %s pattern %s: only %d of %d instructions after %d attempts",
                profile.id, pattern, accepted, wanted, retry_budget,
            )
    return records
