"""Binary reward for candidate robot code vs a reference.

Deterministic mode interprets both programs and demands action-for-action
trajectory equivalence; LLM mode defers to the judge prompt; hybrid runs
the oracle and consults the judge only on narrow misses.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache

from .lang import LangError, interpret, parse
from .llm import ChatClient, ClientError
from .metrics import MatchConfig, match_actions, _filtered
from .sim import RobotProfile, Simulator, Trajectory
from .templates import load_template

DETERMINISTIC = "deterministic"
LLM = "llm"
HYBRID = "hybrid"
MODES = (DETERMINISTIC, LLM, HYBRID)

JUDGE_RETRY_BUDGET = 2
HYBRID_SLACK = 2.0  # tolerance multiplier that defines a "narrow" miss


class ReferenceExecutionError(Exception):
    """The reference code is broken: a service configuration error."""


@dataclass(frozen=True)
class RewardRequest:
    candidate_code: str
    reference_code: str
    robot_profile: str = "uav"
    mode: str = DETERMINISTIC
    match_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.candidate_code.strip():
            raise ValueError("candidate_code must be non-empty")
        if not self.reference_code.strip():
            raise ValueError("reference_code must be non-empty")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class RewardResponse:
    reward: int
    reason: str
    candidate_trajectory: list | None = None
    latency_ms: float = 0.0

    def __post_init__(self):
        if self.reward not in (0, 1):
            raise ValueError("reward must be exactly 0 or 1")

    def to_dict(self) -> dict:
        return {
            "reward": self.reward,
            "reason": self.reason,
            "candidate_trajectory": self.candidate_trajectory,
            "latency_ms": self.latency_ms,
        }


def build_match_config(overrides: dict | None) -> MatchConfig:
    if not overrides:
        return MatchConfig()
    allowed = {"position_tolerance", "yaw_tolerance", "mode", "ignore_kinds",
               "coalesce_rotations", "strict_length"}
    unknown = set(overrides) - allowed
    if unknown:
        raise ValueError(f"unknown match_config overrides: {sorted(unknown)}")
    kwargs = dict(overrides)
    if "ignore_kinds" in kwargs:
        kwargs["ignore_kinds"] = frozenset(kwargs["ignore_kinds"])
    return MatchConfig(**kwargs)


def parse_verdict(reply: str) -> int | None:
    """Last standalone 0/1 token in a judge reply, or None."""
    verdict = None
    for token in reply.replace("\n", " ").split(" "):
        token = token.strip().strip(".,:;!\"'`*()")
        if token in ("0", "1"):
            verdict = int(token)
    return verdict


_PROFILE_REGISTRY: dict[tuple, RobotProfile] = {}


def _profile_key(robot: RobotProfile) -> tuple:
    start = robot.start
    return (
        robot.name,
        robot.dimensionality,
        tuple(sorted(robot.api.items())),
        robot.takeoff_supported,
        (start.north, start.east, start.down, start.yaw, start.airborne),
    )


@lru_cache(maxsize=4096)
def _interpret_cached(code: str, key: tuple):
    """Interpretation is pure, so identical code on an identical profile can
    reuse its trajectory; this keeps burst latency flat when GRPO groups
    share a reference. Errors cache as values and re-raise on use."""
    robot = _PROFILE_REGISTRY[key]
    try:
        return interpret(parse(code), Simulator(robot))
    except LangError as exc:
        return exc


def _interpret(code: str, robot: RobotProfile) -> Trajectory:
    key = _profile_key(robot)
    _PROFILE_REGISTRY.setdefault(key, robot)
    outcome = _interpret_cached(code, key)
    if isinstance(outcome, LangError):
        raise outcome
    return outcome


def _equivalent(cand: Trajectory, ref: Trajectory, cfg: MatchConfig) -> tuple[bool, str]:
    cand_n = len(_filtered(cand.transitions, cfg))
    ref_n = len(_filtered(ref.transitions, cfg))
    if cand_n != ref_n:
        return False, f"action count mismatch: candidate {cand_n} vs reference {ref_n}"
    if ref_n == 0:
        return True, "both trajectories empty after filtering"
    matches = match_actions(cand, ref, cfg)
    if all(matches):
        return True, "trajectories equivalent"
    first_bad = matches.index(False)
    return False, f"action {first_bad} differs beyond tolerance"


def reward_deterministic(
    req: RewardRequest, profiles: dict[str, RobotProfile]
) -> RewardResponse:
    """Oracle reward: 1 iff both codes command the same actions."""
    start = time.perf_counter()
    robot = profiles[req.robot_profile]
    cfg = build_match_config(req.match_overrides)
    try:
        reference = _interpret(req.reference_code, robot)
    except LangError as exc:
        raise ReferenceExecutionError(f"reference code failed: {exc}") from exc
    try:
        candidate = _interpret(req.candidate_code, robot)
    except LangError as exc:
        return RewardResponse(
            reward=0,
            reason=f"candidate failed to execute: {exc}",
            latency_ms=_ms(start),
        )
    ok, reason = _equivalent(candidate, reference, cfg)
    return RewardResponse(
        reward=1 if ok else 0,
        reason=reason,
        candidate_trajectory=candidate.rows(),
        latency_ms=_ms(start),
    )


def reward_llm(
    req: RewardRequest,
    client: ChatClient,
    retry_budget: int = JUDGE_RETRY_BUDGET,
) -> RewardResponse:
    """Judge-based reward; transport failures propagate, never become 0."""
    start = time.perf_counter()
    messages = [
        {"role": "system", "content": load_template("judge")},
        {"role": "user", "content": (
            f"Ground truth code:\n{req.reference_code}\n\n"
            f"Candidate code:\n{req.candidate_code}\n\n"
            "Does the candidate code execute the same robot actions as the "
            "ground truth? Answer 0 or 1."
        )},
    ]
    for attempt in range(retry_budget + 1):
        reply = client.complete(messages)
        verdict = parse_verdict(reply)
        if verdict is not None:
            return RewardResponse(
                reward=verdict, reason="judge verdict", latency_ms=_ms(start)
            )
        if attempt < retry_budget:
            messages.append({"role": "assistant", "content": reply})
            messages.append(
                {"role": "user", "content": "Answer with a single 0 or 1 only."}
            )
    return RewardResponse(reward=0, reason="judge_unparseable", latency_ms=_ms(start))


def reward_hybrid(
    req: RewardRequest,
    profiles: dict[str, RobotProfile],
    client: ChatClient,
) -> RewardResponse:
    """Oracle first; a clean candidate within 2x tolerance goes to the judge."""
    det = reward_deterministic(req, profiles)
    if det.reward == 1 or det.candidate_trajectory is None:
        return det
    cfg = build_match_config(req.match_overrides).loosened(HYBRID_SLACK)
    robot = profiles[req.robot_profile]
    candidate = _interpret(req.candidate_code, robot)
    reference = _interpret(req.reference_code, robot)
    narrow, _ = _equivalent(candidate, reference, cfg)
    if not narrow:
        return det
    llm = reward_llm(req, client)
    return RewardResponse(
        reward=llm.reward,
        reason=f"hybrid: {llm.reason} (oracle said: {det.reason})",
        candidate_trajectory=det.candidate_trajectory,
        latency_ms=det.latency_ms + llm.latency_ms,
    )


def compute_reward(
    req: RewardRequest,
    profiles: dict[str, RobotProfile],
    client: ChatClient | None = None,
) -> RewardResponse:
    if req.robot_profile not in profiles:
        raise KeyError(req.robot_profile)
    if req.mode == DETERMINISTIC:
        return reward_deterministic(req, profiles)
    if client is None:
        raise ClientError(f"mode {req.mode!r} needs an LLM client")
    if req.mode == LLM:
        return reward_llm(req, client)
    return reward_hybrid(req, profiles, client)


def _ms(start: float) -> float:
    return round((time.perf_counter() - start) * 1000.0, 3)
