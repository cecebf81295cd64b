import json
import math
import random

import pytest

from roboforge.sim import (
    ArgumentError,
    Pose,
    RobotProfile,
    Simulator,
    StateError,
    Transition,
    Trajectory,
    UnsupportedApiError,
    builtin_profiles,
    exec_api_call,
    ground_profile,
    load_profile,
    load_profile_dir,
    normalize_yaw,
    uav_profile,
)


def test_pose_normalizes_yaw():
    assert Pose(yaw=270).yaw == -90
    assert Pose(yaw=-180).yaw == 180


def test_pose_rejects_nonfinite():
    with pytest.raises(ValueError):
        Pose(north=float("inf"))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(dx=1, dtheta=5, kind="translate"),
        dict(dx=1, kind="rotate"),
        dict(dx=1, kind="takeoff"),
        dict(dtheta=1, kind="land"),
        dict(dtheta=181, kind="rotate"),
        dict(dtheta=-180, kind="rotate"),
        dict(kind="hover"),
    ],
)
def test_transition_invariants(kwargs):
    with pytest.raises(ValueError):
        Transition(**kwargs)


def test_trajectory_checks_consistency():
    start = Pose()
    t = Transition(dx=1.0)
    with pytest.raises(ValueError):
        Trajectory(initial=start, transitions=(t,), final=start)
    end = Pose(north=1.0)
    Trajectory(initial=start, transitions=(t,), final=end)  # consistent


def test_fly_to_vertical():
    # "fly 5 m up" from hover at -5 is a -5 delta on the Down axis
    state = Pose(down=-5.0, airborne=True)
    pose, t, value = exec_api_call(state, "fly_to", [[0, 0, -10]], uav_profile())
    assert value is None
    assert (t.dx, t.dy, t.dz, t.dtheta) == (0, 0, -5, 0)
    assert pose.down == -10


def test_set_yaw_records_shortest_delta():
    state = Pose(airborne=True)
    pose, t, _ = exec_api_call(state, "set_yaw", [180], uav_profile())
    assert t.dtheta == 180 and t.kind == "rotate"
    assert pose.yaw == 180
    pose, t, _ = exec_api_call(pose, "set_yaw", [-90], uav_profile())
    assert t.dtheta == 90  # 180 -> -90 clockwise by +90... shortest signed
    assert pose.yaw == -90


def test_set_yaw_never_moves_and_fly_to_never_turns():
    rng = random.Random(11)
    for _ in range(200):
        state = Pose(
            north=rng.uniform(-9, 9), east=rng.uniform(-9, 9),
            down=rng.uniform(-9, 0), yaw=rng.uniform(-179, 180), airborne=True,
        )
        pose, _, _ = exec_api_call(state, "set_yaw", [rng.uniform(-400, 400)], uav_profile())
        assert (pose.north, pose.east, pose.down) == (state.north, state.east, state.down)
        target = [rng.uniform(-9, 9) for _ in range(3)]
        pose, _, _ = exec_api_call(state, "fly_to", [target], uav_profile())
        assert pose.yaw == state.yaw


def test_round_trip_apply_matches_post_state():
    rng = random.Random(7)
    profile = uav_profile()
    for _ in range(300):
        state = Pose(
            north=rng.uniform(-9, 9), east=rng.uniform(-9, 9),
            down=rng.uniform(-9, 0), yaw=rng.uniform(-179, 180), airborne=True,
        )
        name = rng.choice(["fly_to", "set_yaw", "takeoff", "land"])
        args = {
            "fly_to": [[rng.uniform(-9, 9) for _ in range(3)]],
            "set_yaw": [rng.uniform(-400, 400)],
            "takeoff": [],
            "land": [],
        }[name]
        pose, t, _ = exec_api_call(state, name, args, profile)
        if t is not None:
            replayed = state.apply(t)
            assert replayed.north == pytest.approx(pose.north, abs=1e-9)
            assert replayed.east == pytest.approx(pose.east, abs=1e-9)
            assert replayed.down == pytest.approx(pose.down, abs=1e-9)
            assert normalize_yaw(replayed.yaw - pose.yaw) == pytest.approx(0, abs=1e-9)


def test_queries_emit_no_transition(uav):
    uav.call("takeoff")
    before = len(uav.trajectory().transitions)
    assert uav.call("get_yaw") == 0.0
    assert uav.call("get_drone_position") == [0.0, 0.0, 0.0]
    assert len(uav.trajectory().transitions) == before


def test_fly_to_requires_airborne():
    state = Pose()
    with pytest.raises(StateError):
        exec_api_call(state, "fly_to", [[0, 0, -1]], uav_profile())
    with pytest.warns(UserWarning):
        exec_api_call(state, "fly_to", [[0, 0, -1]], uav_profile(),
                      enforce_airborne=False)


def test_unknown_call_and_bad_args():
    state = Pose(airborne=True)
    with pytest.raises(UnsupportedApiError):
        exec_api_call(state, "hover", [], uav_profile())
    with pytest.raises(ArgumentError):
        exec_api_call(state, "fly_to", [], uav_profile())
    with pytest.raises(ArgumentError):
        exec_api_call(state, "fly_to", [[1, 2]], uav_profile())
    with pytest.raises(ArgumentError):
        exec_api_call(state, "fly_to", [[1, 2, "x"]], uav_profile())
    with pytest.raises(ArgumentError):
        exec_api_call(state, "set_yaw", [None], uav_profile())


def test_errors_carry_span():
    state = Pose(airborne=True)
    try:
        exec_api_call(state, "hover", [], uav_profile(), span="line 3")
    except UnsupportedApiError as exc:
        assert exc.span == "line 3"


def test_ground_profile_moves_in_heading(ground):
    ground.call("move_forward", [2])
    t = ground.trajectory().transitions[-1]
    assert (t.dx, t.dy, t.dz, t.dtheta) == pytest.approx((2, 0, 0, 0))
    ground.call("rotate", [90])
    ground.call("move_forward", [3])
    t = ground.trajectory().transitions[-1]
    assert t.dx == pytest.approx(0, abs=1e-9)
    assert t.dy == pytest.approx(3, abs=1e-9)
    assert t.dz == 0.0  # down forced to zero on a 2-D profile
    assert ground.call("get_heading") == 90
    assert ground.call("get_position") == pytest.approx([2, 3], abs=1e-9)


def test_ground_profile_rejects_uav_calls(ground):
    with pytest.raises(UnsupportedApiError):
        ground.call("fly_to", [[0, 0, -1]])


def test_rotate_records_normalized_delta(ground):
    ground.call("rotate", [270])
    assert ground.trajectory().transitions[-1].dtheta == -90


def test_takeoff_land_toggle_airborne(uav):
    assert not uav.pose.airborne
    uav.call("takeoff")
    assert uav.pose.airborne
    uav.call("land")
    assert not uav.pose.airborne
    kinds = [t.kind for t in uav.trajectory().transitions]
    assert kinds == ["takeoff", "land"]


def test_trajectory_final_matches(uav):
    uav.call("takeoff")
    uav.call("fly_to", [[1, 2, -3]])
    uav.call("set_yaw", [45])
    traj = uav.trajectory()
    assert traj.final == uav.pose
    assert traj.profile == "uav"


def test_simulator_reset(uav):
    uav.call("takeoff")
    uav.reset()
    assert uav.pose == uav.profile.start
    assert uav.trajectory().transitions == ()


def test_profile_validation():
    with pytest.raises(ValueError):
        RobotProfile(name="bad", dimensionality=3, api={})
    with pytest.raises(ValueError):
        RobotProfile(name="bad", dimensionality=5, api={"takeoff": 0})
    with pytest.raises(ValueError):
        RobotProfile(name="bad", dimensionality=3, api={"warp": 0})


def test_profile_file_loading(tmp_path):
    data = {
        "name": "rover",
        "dimensionality": 2,
        "api": ["move_forward", "rotate", "get_heading"],
        "takeoff_supported": False,
        "speed": 0.5,
        "start": {"north": 1.0, "yaw": 90.0},
    }
    path = tmp_path / "rover.json"
    path.write_text(json.dumps(data))
    profile = load_profile(path)
    assert profile.name == "rover"
    assert profile.start.north == 1.0 and profile.start.yaw == 90.0
    assert profile.api == {"move_forward": 1, "rotate": 1, "get_heading": 0}

    profiles = load_profile_dir(tmp_path)
    assert set(profiles) == {"rover"}


def test_builtin_profiles_cover_paper_api():
    profiles = builtin_profiles()
    assert set(profiles["uav"].api) == {
        "takeoff", "land", "fly_to", "get_yaw", "set_yaw", "get_drone_position"
    }
    assert profiles["uav"].speed == 2.0
    assert set(profiles["ground"].api) == {
        "move_forward", "rotate", "get_position", "get_heading"
    }


def test_inverse_body_motion_returns_home():
    rng = random.Random(3)
    profile = uav_profile()
    for _ in range(100):
        sim = Simulator(profile)
        sim.call("takeoff")
        sim.call("set_yaw", [rng.uniform(-179, 180)])
        f, r, d = (rng.uniform(-9, 9) for _ in range(3))
        from roboforge.sim import body_to_world

        dn, de, dd = body_to_world((f, r, d), sim.pose.yaw)
        p = sim.pose
        sim.call("fly_to", [[p.north + dn, p.east + de, p.down + dd]])
        dn, de, dd = body_to_world((-f, -r, -d), sim.pose.yaw)
        p = sim.pose
        sim.call("fly_to", [[p.north + dn, p.east + de, p.down + dd]])
        assert sim.pose.north == pytest.approx(0, abs=1e-9)
        assert sim.pose.east == pytest.approx(0, abs=1e-9)
        assert sim.pose.down == pytest.approx(0, abs=1e-9)


def test_yaw_180_matches_math():
    # 540 == 180 (mod 360); both normalize to +180 by the half-open convention
    assert normalize_yaw(540) == 180
    assert math.isclose(normalize_yaw(-540), 180)
