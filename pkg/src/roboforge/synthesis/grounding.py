"""Corrective grounding: instruction -> code, with a human-review queue.

Each round asks the code model for a program, executes it in a fresh
simulator, feeds any parse/runtime error back verbatim, and finally asks
the equivalence judge. Complex-class instructions are never auto-accepted;
their best candidate is routed to the review queue.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

from ..lang import LangError, extract_code, interpret, parse
from ..llm import ChatClient
from ..reward import parse_verdict
from ..sim import RobotProfile, Simulator
from ..templates import load_template
from .generate import InstructionRecord
from .profiles import COMPLEX

log = logging.getLogger(__name__)

DEFAULT_MAX_ROUNDS = 3
DEFAULT_JOBS = 4

AUTO_ACCEPTED = "auto_accepted"
NEEDS_REVIEW = "needs_review"
REVIEWED_ACCEPTED = "reviewed_accepted"
FAILED = "failed"


class ReviewQueueError(Exception):
    """Review file is malformed; nothing was applied."""


@dataclass(frozen=True)
class GroundingResult:
    instruction_id: str
    instruction: str
    code: str
    rounds_used: int
    status: str
    trajectory_rows: list | None
    judge_transcript: str | None = None
    note: str | None = None
    profile_id: str = ""
    complexity_class: str = ""

    def to_row(self) -> dict:
        return {
            "instruction_id": self.instruction_id,
            "instruction": self.instruction,
            "code": self.code,
            "rounds_used": self.rounds_used,
            "status": self.status,
            "trajectory_rows": self.trajectory_rows,
            "judge_transcript": self.judge_transcript,
            "note": self.note,
            "profile_id": self.profile_id,
            "complexity_class": self.complexity_class,
        }

    @classmethod
    def from_row(cls, row: dict) -> "GroundingResult":
        return cls(**{f.name: row.get(f.name) for f in fields(cls)})


def summarize_trajectory(rows: list[dict]) -> str:
    lines = ["kind dx dy dz dtheta"]
    for row in rows:
        lines.append(
            f"{row['kind']} {row['dx']:.3f} {row['dy']:.3f} "
            f"{row['dz']:.3f} {row['dtheta']:.1f}"
        )
    return "\n".join(lines)


def _judge(client: ChatClient, instruction: str, code: str, rows: list[dict]) -> str:
    user = (
        f"Task instruction:\n{instruction}\n\n"
        f"Candidate code:\n{code}\n"
        f"Simulated state transitions of the candidate code:\n"
        f"{summarize_trajectory(rows)}\n\n"
        "Does the candidate code perform exactly the robot actions the task asks for?"
    )
    return client.complete(
        [
            {"role": "system", "content": load_template("judge")},
            {"role": "user", "content": user},
        ]
    )


def ground_instruction(
    instr: InstructionRecord,
    client: ChatClient,
    robot: RobotProfile,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> GroundingResult:
    if not instr.text.strip():
        raise ValueError(f"instruction {instr.id} has empty text")
    system = {"role": "system", "content": load_template("codegen")}
    messages = [system, {"role": "user", "content": f"Task: {instr.text}"}]

    last_completion = ""
    last_note: str | None = None
    best: tuple[str, list, str | None] | None = None  # code, rows, judge reply

    for round_no in range(1, max_rounds + 1):
        completion = client.complete(messages)
        last_completion = completion
        messages.append({"role": "assistant", "content": completion})

        code = extract_code(completion)
        if code is None:
            last_note = "no parseable code found in the reply"
            messages.append(
                {"role": "user", "content":
                 f"{last_note}. Output the full program again."}
            )
            continue
        try:
            rows = interpret(parse(code), Simulator(robot)).rows()
        except LangError as exc:
            last_note = str(exc)
            messages.append(
                {"role": "user", "content":
                 f"Executing the code failed: {exc}. Output the full corrected program."}
            )
            continue

        judge_reply = _judge(client, instr.text, code, rows)
        verdict = parse_verdict(judge_reply)
        best = (code, rows, judge_reply)
        if verdict == 1:
            status = NEEDS_REVIEW if instr.complexity_class == COMPLEX else AUTO_ACCEPTED
            return GroundingResult(
                instruction_id=instr.id,
                instruction=instr.text,
                code=code,
                rounds_used=round_no,
                status=status,
                trajectory_rows=rows,
                judge_transcript=judge_reply,
                profile_id=instr.profile_id,
                complexity_class=instr.complexity_class,
            )
        last_note = "judge found the behavior not equivalent to the task"
        messages.append(
            {"role": "user", "content":
             "The behavior does not match the task. Output a corrected program."}
        )

    if instr.complexity_class == COMPLEX and best is not None:
        code, rows, judge_reply = best
        return GroundingResult(
            instruction_id=instr.id,
            instruction=instr.text,
            code=code,
            rounds_used=max_rounds,
            status=NEEDS_REVIEW,
            trajectory_rows=rows,
            judge_transcript=judge_reply,
            note=last_note,
            profile_id=instr.profile_id,
            complexity_class=instr.complexity_class,
        )
    return GroundingResult(
        instruction_id=instr.id,
        instruction=instr.text,
        code=last_completion,
        rounds_used=max_rounds,
        status=FAILED,
        trajectory_rows=None,
        judge_transcript=last_completion,
        note=last_note,
        profile_id=instr.profile_id,
        complexity_class=instr.complexity_class,
    )


def ground_all(
    instructions: list[InstructionRecord],
    client: ChatClient,
    robot: RobotProfile,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    jobs: int = DEFAULT_JOBS,
) -> list[GroundingResult]:
    """Bounded-parallel grounding; results ordered by instruction id."""
    with ThreadPoolExecutor(max_workers=max(jobs, 1)) as pool:
        results = list(
            pool.map(lambda i: ground_instruction(i, client, robot, max_rounds),
                     instructions)
        )
    return sorted(results, key=lambda r: r.instruction_id)


# -- review queue ----------------------------------------------------------

_QUEUE_FIELDS = ("task_id", "instruction", "candidate_code", "trajectory_rows",
                 "resolution_code")


def export_review_queue(results: list[GroundingResult], path: str | Path) -> int:
    """Write pending needs_review records as JSONL; returns the count."""
    pending = [r for r in results if r.status == NEEDS_REVIEW]
    if not pending:
        raise ValueError("no pending review records to export")
    with open(path, "w", encoding="utf-8") as fh:
        for r in pending:
            row = {
                "task_id": r.instruction_id,
                "instruction": r.instruction,
                "candidate_code": r.code,
                "trajectory_rows": r.trajectory_rows or [],
                "resolution_code": "",
            }
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return len(pending)


def import_review_resolutions(
    results: list[GroundingResult],
    path: str | Path,
    robot: RobotProfile,
) -> tuple[list[GroundingResult], list[tuple[str, str]]]:
    """Apply reviewed resolutions from a queue file.

    Returns ``(updated_results, rejections)``; a rejection is
    ``(task_id, error)`` for a resolution that failed to parse/interpret.
    The file is validated wholesale first: any structurally bad record
    aborts the import before anything is applied.
    """
    rows = []
    errors = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                errors.append(f"line {lineno}: invalid JSON ({exc})")
                continue
            missing = [f for f in _QUEUE_FIELDS if f not in row]
            if missing:
                errors.append(f"line {lineno}: missing fields {missing}")
                continue
            rows.append(row)
    if errors:
        raise ReviewQueueError(
            "malformed review file; nothing imported:\n" + "\n".join(errors)
        )

    by_id = {r.instruction_id: r for r in results}
    rejections: list[tuple[str, str]] = []
    for row in rows:
        task_id = row["task_id"]
        result = by_id.get(task_id)
        if result is None or result.status != NEEDS_REVIEW:
            rejections.append((task_id, "no pending record with this id"))
            continue
        resolution = row["resolution_code"]
        if not resolution.strip():
            continue  # reviewer left it unresolved
        try:
            rows_out = interpret(parse(resolution), Simulator(robot)).rows()
        except LangError as exc:
            rejections.append((task_id, str(exc)))
            continue
        by_id[task_id] = replace(
            result,
            code=resolution,
            status=REVIEWED_ACCEPTED,
            trajectory_rows=rows_out,
            note="accepted by human review",
        )
    updated = sorted(by_id.values(), key=lambda r: r.instruction_id)
    for task_id, err in rejections:
        log.warning("review resolution rejected for %s: %s", task_id, err)
    return updated, rejections
