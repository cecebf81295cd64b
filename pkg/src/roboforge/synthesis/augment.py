"""Instruction augmentation: operational phrasing -> deployment scenario."""

from __future__ import annotations

import logging
import re

from ..lang import LangError, extract_code, interpret, parse
from ..llm import ChatClient
from ..sim import RobotProfile, Simulator
from ..templates import load_template

log = logging.getLogger(__name__)

DEFAULT_RETRY_BUDGET = 3

_MARKER = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s+")


class AugmentationError(Exception):
    """No acceptable augmentation within the retry budget."""


def _valid_paragraph(text: str) -> str | None:
    stripped = text.strip()
    if not stripped:
        return "empty reply"
    if "\n\n" in stripped:
        return "more than one paragraph"
    if any(_MARKER.match(line) for line in stripped.splitlines()):
        return "list markers are not allowed"
    return None


def augment_instruction(
    instruction: str,
    code: str,
    client: ChatClient,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
    variant: int = 1,
) -> str:
    """One-paragraph real-world rephrasing of a grounded instruction."""
    system = {"role": "system", "content": load_template("augment")}
    user = (
        f"Task: {instruction}\n\n"
        f"Ground truth code for the task:\n{code}\n"
        f"Rewrite the task as a realistic real-world drone operation scenario "
        f"(variant {variant})."
    )
    messages = [system, {"role": "user", "content": user}]
    problem = "no attempt made"
    for _ in range(retry_budget):
        reply = client.complete(messages)
        problem = _valid_paragraph(reply)
        if problem is None:
            return reply.strip()
        messages.append({"role": "assistant", "content": reply})
        messages.append(
            {"role": "user", "content":
             f"Invalid output ({problem}). Reply with exactly one paragraph."}
        )
    raise AugmentationError(f"augmentation failed after {retry_budget} attempts: {problem}")


def augmentation_matches(
    augmented: str,
    reference_rows: list[dict],
    client: ChatClient,
    robot: RobotProfile,
) -> bool:
    """Optional validation pass: re-ground the augmented text and compare.

    Returns False (flag for review) when the augmented instruction grounds
    to a different transition sequence or fails to ground at all.
    """
    completion = client.complete(
        [
            {"role": "system", "content": load_template("codegen")},
            {"role": "user", "content": f"Task: {augmented}"},
        ]
    )
    code = extract_code(completion)
    if code is None:
        return False
    try:
        rows = interpret(parse(code), Simulator(robot)).rows()
    except LangError as exc:
        log.warning("augmented grounding failed: %s", exc)
        return False
    return rows == reference_rows
