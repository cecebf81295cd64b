"""Trajectory scoring: per-action matching, completeness, and success rate.

A predicted trajectory is compared to ground truth action by action. An
action matches when kind and every delta component agree within tolerance;
completeness is the matched fraction of ground-truth actions and a task
succeeds only when every action matched, nothing errored, and (by default)
nothing extra was commanded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .sim import LAND, ROTATE, TAKEOFF, Trajectory, Transition, normalize_yaw

PER_INDEX = "per_index"
PREFIX = "prefix"


class MetricsError(Exception):
    """Raised for malformed scoring inputs (wrong profile, empty ground truth)."""


@dataclass(frozen=True)
class MatchConfig:
    position_tolerance: float = 0.1
    yaw_tolerance: float = 1.0
    mode: str = PER_INDEX
    ignore_kinds: frozenset[str] = frozenset({TAKEOFF, LAND})
    coalesce_rotations: bool = False
    strict_length: bool = True  # surplus predicted actions force SR = 0

    def __post_init__(self):
        if self.position_tolerance <= 0 or self.yaw_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.mode not in (PER_INDEX, PREFIX):
            raise ValueError(f"unknown match mode {self.mode!r}")
        object.__setattr__(self, "ignore_kinds", frozenset(self.ignore_kinds))

    def loosened(self, factor: float) -> "MatchConfig":
        return replace(
            self,
            position_tolerance=self.position_tolerance * factor,
            yaw_tolerance=self.yaw_tolerance * factor,
        )


def _filtered(transitions: Sequence[Transition], cfg: MatchConfig) -> list[Transition]:
    actions = [t for t in transitions if t.kind not in cfg.ignore_kinds]
    if not cfg.coalesce_rotations:
        return actions
    out: list[Transition] = []
    for t in actions:
        if t.kind == ROTATE and out and out[-1].kind == ROTATE:
            merged = normalize_yaw(out[-1].dtheta + t.dtheta)
            out[-1] = Transition(dtheta=merged, kind=ROTATE)
        else:
            out.append(t)
    return out


def _action_matches(pred: Transition, gt: Transition, cfg: MatchConfig) -> bool:
    if pred.kind != gt.kind:
        return False
    return (
        abs(pred.dx - gt.dx) <= cfg.position_tolerance
        and abs(pred.dy - gt.dy) <= cfg.position_tolerance
        and abs(pred.dz - gt.dz) <= cfg.position_tolerance
        and abs(normalize_yaw(pred.dtheta - gt.dtheta)) <= cfg.yaw_tolerance
    )


def match_actions(
    pred: Trajectory | Sequence[Transition],
    gt: Trajectory | Sequence[Transition],
    cfg: MatchConfig = MatchConfig(),
) -> list[bool]:
    """Per-ground-truth-action match flags after filtering ignored kinds."""
    if isinstance(pred, Trajectory) and isinstance(gt, Trajectory):
        if pred.profile and gt.profile and pred.profile != gt.profile:
            raise MetricsError(
                f"profile mismatch: predicted '{pred.profile}' vs ground truth '{gt.profile}'"
            )
    pred_actions = _filtered(pred.transitions if isinstance(pred, Trajectory) else pred, cfg)
    gt_actions = _filtered(gt.transitions if isinstance(gt, Trajectory) else gt, cfg)

    matches: list[bool] = []
    broken = False
    for i, action in enumerate(gt_actions):
        if broken or i >= len(pred_actions):
            matches.append(False)
            continue
        ok = _action_matches(pred_actions[i], action, cfg)
        matches.append(ok)
        if cfg.mode == PREFIX and not ok:
            broken = True
    return matches


def completeness(matches: Sequence[bool]) -> float:
    """Fraction of ground-truth actions that were executed correctly."""
    if not matches:
        raise MetricsError("ground truth has no scorable actions")
    return sum(bool(m) for m in matches) / len(matches)


def success(completeness_value: float) -> int:
    """1 iff the whole sequence was correct (completeness exactly 1)."""
    if not 0.0 <= completeness_value <= 1.0:
        raise MetricsError(f"completeness {completeness_value} outside [0, 1]")
    return 1 if completeness_value == 1.0 else 0


@dataclass(frozen=True)
class TaskScore:
    """Score of one task in one run.

    ``sr`` is 1 only when completeness is 1 *and* the run was error-free
    and (under strict_length) emitted no surplus actions; execution errors
    therefore force ``sr = 0`` even with every action matched.
    """

    task_id: str
    matches: tuple[bool, ...]
    completeness: float
    sr: int
    error: str | None = None

    def __post_init__(self):
        if self.matches:
            expected = sum(self.matches) / len(self.matches)
            if abs(self.completeness - expected) > 1e-12:
                raise ValueError("completeness inconsistent with matches")
        if self.sr == 1 and self.completeness != 1.0:
            raise ValueError("sr = 1 requires completeness = 1")


def score_task(
    task_id: str,
    pred: Trajectory | None,
    gt: Trajectory,
    cfg: MatchConfig = MatchConfig(),
    error: str | None = None,
) -> TaskScore:
    """Build a TaskScore; ``pred=None`` means the prediction never executed.

    A partially executed prediction (``pred`` holds the transitions emitted
    before the failure, ``error`` set) still gets credit for the actions it
    performed, but can no longer succeed.
    """
    gt_actions = _filtered(gt.transitions, cfg)
    if not gt_actions:
        raise MetricsError(f"task {task_id!r}: ground truth has no scorable actions")
    if pred is None:
        matches = [False] * len(gt_actions)
        return TaskScore(task_id, tuple(matches), 0.0, 0, error or "prediction failed")

    matches = match_actions(pred, gt, cfg)
    frac = completeness(matches)
    sr = success(frac)
    if error is not None:
        sr = 0
    if cfg.strict_length and len(_filtered(pred.transitions, cfg)) > len(gt_actions):
        sr = 0
    return TaskScore(task_id, tuple(matches), frac, sr, error)


@dataclass(frozen=True)
class GroupStats:
    name: str
    task_count: int
    sr: float
    completeness: float


@dataclass(frozen=True)
class TaskSummary:
    task_id: str
    group: str | None
    sr_mean: float
    completeness_mean: float
    runs: tuple[tuple[str, TaskScore], ...]  # (run id, score)


@dataclass(frozen=True)
class SuiteReport:
    """Aggregated scores: per-group means over per-task means over runs."""

    run_count: int
    groups: tuple[GroupStats, ...]
    tasks: tuple[TaskSummary, ...]
    notes: tuple[str, ...] = field(default_factory=tuple)


def aggregate(
    runs: Mapping[str, Sequence[TaskScore]],
    grouping: Mapping[str, str],
) -> SuiteReport:
    """Aggregate per-run task scores into a suite report.

    ``runs`` maps run id to that run's task scores. Means are arithmetic:
    first over runs within a task, then over tasks within a group. Tasks
    missing from ``grouping`` are reported under the pseudo-group
    "ungrouped", never dropped.
    """
    if not runs:
        raise MetricsError("no runs to aggregate")
    by_task: dict[str, list[tuple[str, TaskScore]]] = {}
    for run_id in sorted(runs):
        for score in runs[run_id]:
            by_task.setdefault(score.task_id, []).append((run_id, score))

    notes: list[str] = []
    summaries: list[TaskSummary] = []
    for task_id in sorted(by_task):
        scored = by_task[task_id]
        group = grouping.get(task_id)
        if group is None:
            notes.append(f"task {task_id} missing from grouping; reported as ungrouped")
        summaries.append(
            TaskSummary(
                task_id=task_id,
                group=group,
                sr_mean=_mean(s.sr for _, s in scored),
                completeness_mean=_mean(s.completeness for _, s in scored),
                runs=tuple(scored),
            )
        )

    group_names = sorted({g for g in grouping.values()})
    groups: list[GroupStats] = []
    for name in group_names:
        members = [s for s in summaries if s.group == name]
        if not members:
            notes.append(f"group {name} has no scored tasks; omitted")
            continue
        groups.append(
            GroupStats(
                name=name,
                task_count=len(members),
                sr=_mean(s.sr_mean for s in members),
                completeness=_mean(s.completeness_mean for s in members),
            )
        )
    ungrouped = [s for s in summaries if s.group is None]
    if ungrouped:
        groups.append(
            GroupStats(
                name="ungrouped",
                task_count=len(ungrouped),
                sr=_mean(s.sr_mean for s in ungrouped),
                completeness=_mean(s.completeness_mean for s in ungrouped),
            )
        )

    return SuiteReport(
        run_count=len(runs),
        groups=tuple(groups),
        tasks=tuple(summaries),
        notes=tuple(notes),
    )


def _mean(values) -> float:
    values = list(values)
    return math.fsum(values) / len(values)
