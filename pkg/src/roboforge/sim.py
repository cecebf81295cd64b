"""Kinematic robot state, NED frame transforms, and API-call execution.

World frame is North-East-Down: altitude gain is a *negative* Down delta.
Yaw is measured in degrees, clockwise from North, and kept normalized to
the half-open interval (-180, 180].
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

POSE_TOL = 1e-9

TRANSLATE = "translate"
ROTATE = "rotate"
TAKEOFF = "takeoff"
LAND = "land"
TRANSITION_KINDS = (TRANSLATE, ROTATE, TAKEOFF, LAND)


class SimulatorError(Exception):
    """Base class for simulator failures.

    ``span`` is filled in by callers that know where in some source text
    the offending call came from (the interpreter does this).
    """

    def __init__(self, message: str, span=None):
        super().__init__(message)
        self.span = span


class UnsupportedApiError(SimulatorError):
    """Call name not in the active robot profile."""


class ArgumentError(SimulatorError):
    """Wrong arity or non-numeric arguments for an API call."""


class StateError(SimulatorError):
    """Call not legal in the current robot state (e.g. fly_to on the ground)."""


def normalize_yaw(angle: float) -> float:
    """Reduce ``angle`` (degrees) to the canonical (-180, 180] range."""
    if not math.isfinite(angle):
        raise ValueError(f"yaw angle must be finite, got {angle!r}")
    r = math.fmod(angle, 360.0)
    if r > 180.0:
        r -= 360.0
    elif r <= -180.0:
        r += 360.0
    # fmod(-180.0, 360) is -180.0 exactly; the branch above maps it to +180.
    return r


def body_to_world(delta_body: Sequence[float], yaw: float) -> tuple[float, float, float]:
    """Rotate a (forward, right, down) body-frame delta into world NED.

    ``yaw`` is clockwise-from-North degrees. Down passes through unrotated.
    """
    f, r, d = (float(c) for c in delta_body)
    for name, c in (("forward", f), ("right", r), ("down", d)):
        if not math.isfinite(c):
            raise ValueError(f"body delta {name} must be finite, got {c!r}")
    rad = math.radians(normalize_yaw(yaw))
    c, s = math.cos(rad), math.sin(rad)
    return (f * c - r * s, f * s + r * c, d)


@dataclass(frozen=True)
class Pose:
    """Robot configuration: world position plus heading.

    ``down`` is positive toward the ground (NED). ``yaw`` is normalized on
    construction so two poses that face the same way compare equal.
    """

    north: float = 0.0
    east: float = 0.0
    down: float = 0.0
    yaw: float = 0.0
    airborne: bool = False

    def __post_init__(self):
        for name in ("north", "east", "down"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"pose {name} must be finite")
        object.__setattr__(self, "yaw", normalize_yaw(self.yaw))

    def position(self) -> list[float]:
        return [self.north, self.east, self.down]

    def apply(self, t: Transition) -> "Pose":
        """Pose after executing ``t``."""
        if t.kind == TRANSLATE:
            return replace(
                self,
                north=self.north + t.dx,
                east=self.east + t.dy,
                down=self.down + t.dz,
            )
        if t.kind == ROTATE:
            return replace(self, yaw=normalize_yaw(self.yaw + t.dtheta))
        if t.kind == TAKEOFF:
            return replace(self, airborne=True)
        return replace(self, airborne=False)


@dataclass(frozen=True)
class Transition:
    """One commanded action as a [dx, dy, dz, dtheta] delta vector."""

    dx: float = 0.0
    dy: float = 0.0
    dz: float = 0.0
    dtheta: float = 0.0
    kind: str = TRANSLATE

    def __post_init__(self):
        if self.kind not in TRANSITION_KINDS:
            raise ValueError(f"unknown transition kind {self.kind!r}")
        if self.kind == TRANSLATE and self.dtheta != 0.0:
            raise ValueError("translate transition must have dtheta == 0")
        if self.kind == ROTATE and (self.dx or self.dy or self.dz):
            raise ValueError("rotate transition must have zero displacement")
        if self.kind in (TAKEOFF, LAND) and any(
            (self.dx, self.dy, self.dz, self.dtheta)
        ):
            raise ValueError(f"{self.kind} transition must be all-zero")
        if not (-180.0 < self.dtheta <= 180.0):
            raise ValueError(f"dtheta {self.dtheta} outside (-180, 180]")

    def vector(self) -> tuple[float, float, float, float]:
        return (self.dx, self.dy, self.dz, self.dtheta)


@dataclass(frozen=True)
class Trajectory:
    """Recorded run: start pose, the action deltas, and the resulting pose."""

    initial: Pose
    transitions: tuple[Transition, ...]
    final: Pose
    profile: str = ""

    def __post_init__(self):
        pose = self.initial
        for t in self.transitions:
            pose = pose.apply(t)
        drift = max(
            abs(pose.north - self.final.north),
            abs(pose.east - self.final.east),
            abs(pose.down - self.final.down),
            abs(normalize_yaw(pose.yaw - self.final.yaw)),
        )
        if drift > POSE_TOL or pose.airborne != self.final.airborne:
            raise ValueError(f"final pose inconsistent with transitions (drift {drift})")

    def rows(self) -> list[dict]:
        return [
            {"kind": t.kind, "dx": t.dx, "dy": t.dy, "dz": t.dz, "dtheta": t.dtheta}
            for t in self.transitions
        ]


# API names with known semantics; a profile exposes a subset of these.
UAV_API = {
    "takeoff": 0,
    "land": 0,
    "fly_to": 1,
    "get_yaw": 0,
    "set_yaw": 1,
    "get_drone_position": 0,
}
GROUND_API = {
    "move_forward": 1,
    "rotate": 1,
    "get_position": 0,
    "get_heading": 0,
}
KNOWN_CALLS = {**UAV_API, **GROUND_API}


@dataclass(frozen=True)
class RobotProfile:
    """Declarative robot description: which calls exist and where it starts."""

    name: str
    dimensionality: int
    api: dict[str, int]  # call name -> arity
    takeoff_supported: bool = True
    speed: float = 2.0  # meters/second, informational only
    start: Pose = field(default_factory=Pose)

    def __post_init__(self):
        if not self.api:
            raise ValueError("profile api must be non-empty")
        if self.dimensionality not in (2, 3):
            raise ValueError("dimensionality must be 2 or 3")
        for name in self.api:
            if name not in KNOWN_CALLS:
                raise ValueError(f"profile {self.name!r} lists unknown call {name!r}")


def uav_profile() -> RobotProfile:
    return RobotProfile(name="uav", dimensionality=3, api=dict(UAV_API))


def ground_profile() -> RobotProfile:
    return RobotProfile(
        name="ground",
        dimensionality=2,
        api=dict(GROUND_API),
        takeoff_supported=False,
        speed=1.0,
    )


def load_profile(path: str | Path) -> RobotProfile:
    """Read a profile from a JSON file (name, api, dimensionality, start pose)."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    start = data.get("start", {})
    return RobotProfile(
        name=data["name"],
        dimensionality=int(data["dimensionality"]),
        api={name: KNOWN_CALLS[name] for name in data["api"]},
        takeoff_supported=bool(data.get("takeoff_supported", True)),
        speed=float(data.get("speed", 2.0)),
        start=Pose(
            north=float(start.get("north", 0.0)),
            east=float(start.get("east", 0.0)),
            down=float(start.get("down", 0.0)),
            yaw=float(start.get("yaw", 0.0)),
            airborne=bool(start.get("airborne", False)),
        ),
    )


def builtin_profiles() -> dict[str, RobotProfile]:
    return {"uav": uav_profile(), "ground": ground_profile()}


def load_profile_dir(path: str | Path) -> dict[str, RobotProfile]:
    profiles = {}
    for f in sorted(Path(path).glob("*.json")):
        p = load_profile(f)
        profiles[p.name] = p
    if not profiles:
        raise ValueError(f"no profile files found in {path}")
    return profiles


def _require_numbers(name: str, values: Sequence[float], span) -> list[float]:
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ArgumentError(f"{name} expects finite numbers, got {v!r}", span)
        out.append(float(v))
    return out


def exec_api_call(
    state: Pose,
    name: str,
    args: Sequence,
    profile: RobotProfile,
    span=None,
    enforce_airborne: bool = True,
):
    """Execute one API call against ``state``.

    Returns ``(new_pose, transition_or_None, return_value_or_None)``.
    Query calls leave the pose untouched and emit no transition.
    """
    if name not in profile.api:
        raise UnsupportedApiError(
            f"call '{name}' not supported by profile '{profile.name}'", span
        )
    arity = profile.api[name]
    if len(args) != arity:
        raise ArgumentError(
            f"{name} takes {arity} argument(s), got {len(args)}", span
        )

    if name == "takeoff":
        return state.apply(t := Transition(kind=TAKEOFF)), t, None
    if name == "land":
        return state.apply(t := Transition(kind=LAND)), t, None
    if name == "fly_to":
        target = args[0]
        if not isinstance(target, (list, tuple)) or len(target) != 3:
            raise ArgumentError("fly_to expects a list of three coordinates", span)
        x, y, z = _require_numbers("fly_to", target, span)
        if not state.airborne:
            if enforce_airborne:
                raise StateError("fly_to requires the robot to be airborne", span)
            warnings.warn("fly_to while not airborne", stacklevel=2)
        t = Transition(dx=x - state.north, dy=y - state.east, dz=z - state.down)
        return state.apply(t), t, None
    if name == "set_yaw":
        (target_yaw,) = _require_numbers("set_yaw", args, span)
        t = Transition(dtheta=normalize_yaw(target_yaw - state.yaw), kind=ROTATE)
        return state.apply(t), t, None
    if name == "get_yaw":
        return state, None, state.yaw
    if name == "get_drone_position":
        return state, None, state.position()

    if name == "move_forward":
        (dist,) = _require_numbers("move_forward", args, span)
        dn, de, _ = body_to_world((dist, 0.0, 0.0), state.yaw)
        t = Transition(dx=dn, dy=de, dz=0.0)
        return state.apply(t), t, None
    if name == "rotate":
        (deg,) = _require_numbers("rotate", args, span)
        t = Transition(dtheta=normalize_yaw(deg), kind=ROTATE)
        return state.apply(t), t, None
    if name == "get_position":
        pos = state.position()
        return state, None, pos[: profile.dimensionality]
    if name == "get_heading":
        return state, None, state.yaw

    raise UnsupportedApiError(f"no semantics for call '{name}'", span)


class Simulator:
    """Mutable single-owner execution context for one robot run.

    Cheap to construct; use one instance per task. ``call`` routes through
    :func:`exec_api_call` and records every emitted transition.
    """

    def __init__(self, profile: RobotProfile, enforce_airborne: bool = True):
        self.profile = profile
        self.enforce_airborne = enforce_airborne
        self.reset()

    def reset(self) -> None:
        self.pose = self.profile.start
        self._initial = self.profile.start
        self._transitions: list[Transition] = []

    def call(self, name: str, args: Sequence = (), span=None):
        pose, transition, value = exec_api_call(
            self.pose, name, args, self.profile, span, self.enforce_airborne
        )
        self.pose = pose
        if transition is not None:
            self._transitions.append(transition)
        return value

    def trajectory(self) -> Trajectory:
        return Trajectory(
            initial=self._initial,
            transitions=tuple(self._transitions),
            final=self.pose,
            profile=self.profile.name,
        )
