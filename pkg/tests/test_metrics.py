import itertools

import pytest

from roboforge.metrics import (
    MatchConfig,
    MetricsError,
    TaskScore,
    aggregate,
    completeness,
    match_actions,
    score_task,
    success,
)
from roboforge.sim import Pose, Trajectory, Transition


def T(dx=0.0, dy=0.0, dz=0.0, dtheta=0.0, kind="translate"):
    return Transition(dx=dx, dy=dy, dz=dz, dtheta=dtheta, kind=kind)


def traj(transitions, profile="uav"):
    pose = Pose(airborne=True)
    start = pose
    for t in transitions:
        pose = pose.apply(t)
    return Trajectory(initial=start, transitions=tuple(transitions),
                      final=pose, profile=profile)


UP5 = T(dz=-5)
DOWN4 = T(dz=4)
DOWN5 = T(dz=5)
ROT90 = T(dtheta=90, kind="rotate")
TKOFF = T(kind="takeoff")


def test_identity_matches_all():
    gt = traj([TKOFF, UP5, DOWN4, ROT90])
    assert match_actions(gt, gt) == [True, True, True]  # takeoff filtered


def test_second_action_off_by_one_meter():
    gt = traj([UP5, DOWN4])
    pred = traj([UP5, DOWN5])
    assert match_actions(pred, gt) == [True, False]


def test_extra_predicted_action_keeps_per_index_matches():
    gt = traj([UP5, DOWN4, ROT90, UP5])
    pred = traj([UP5, DOWN4, ROT90, UP5, DOWN4])
    matches = match_actions(pred, gt)
    assert matches == [True] * 4
    assert completeness(matches) == 1.0


def test_prefix_mode_stops_at_first_miss():
    gt = traj([UP5, DOWN4, ROT90])
    pred = traj([UP5, DOWN5, ROT90])
    cfg = MatchConfig(mode="prefix")
    assert match_actions(pred, gt, cfg) == [True, False, False]
    assert match_actions(pred, gt) == [True, False, True]


def test_kind_must_match():
    gt = traj([ROT90])
    pred = traj([T(dx=0.0)])
    assert match_actions(pred, gt) == [False]


def test_rotation_wraparound_tolerance():
    gt = traj([T(dtheta=180, kind="rotate")])
    pred = traj([T(dtheta=-179.5, kind="rotate")])
    assert match_actions(pred, gt) == [True]  # 0.5 degrees apart circularly


def test_coalesce_rotations():
    gt = traj([T(dtheta=180, kind="rotate")])
    pred = traj([T(dtheta=90, kind="rotate"), T(dtheta=90, kind="rotate")])
    assert match_actions(pred, gt) == [False]
    cfg = MatchConfig(coalesce_rotations=True)
    assert match_actions(pred, gt, cfg) == [True]


def test_profile_mismatch_is_error():
    a = traj([UP5], profile="uav")
    b = traj([UP5], profile="ground")
    with pytest.raises(MetricsError):
        match_actions(a, b)


def test_completeness_examples():
    assert completeness([True, True, True, False]) == 0.75
    assert completeness([False, False]) == 0.0
    assert completeness([True] * 3) == 1.0
    with pytest.raises(MetricsError):
        completeness([])


def test_success_examples():
    assert success(1.0) == 1
    assert success(0.99) == 0
    assert success(0.0) == 0
    with pytest.raises(MetricsError):
        success(1.5)


def test_success_iff_all_true_exhaustive():
    for n in range(1, 9):
        for bits in itertools.product([False, True], repeat=n):
            c = completeness(bits)
            assert success(c) == (1 if all(bits) else 0)


def test_monotonicity_in_tolerance():
    gt = traj([UP5, DOWN4, ROT90])
    pred = traj([T(dz=-5.05), T(dz=4.2), T(dtheta=91.5, kind="rotate")])
    tight = MatchConfig(position_tolerance=0.01, yaw_tolerance=0.5)
    default = MatchConfig()
    loose = MatchConfig(position_tolerance=0.5, yaw_tolerance=5.0)
    results = [
        completeness(match_actions(pred, gt, cfg))
        for cfg in (tight, default, loose)
    ]
    assert results == sorted(results)
    assert results[0] == 0.0 and results[2] == 1.0


def test_permutation_sensitivity():
    gt = traj([UP5, DOWN4])
    swapped = traj([DOWN4, UP5])
    assert match_actions(swapped, gt) == [False, False]


def test_task_score_invariants():
    with pytest.raises(ValueError):
        TaskScore("t", (True, False), 1.0, 1)
    with pytest.raises(ValueError):
        TaskScore("t", (True, True), 1.0, 1, error=None).__class__(
            "t", (True, False), 0.5, 1
        )


def test_score_task_error_blocks_success():
    gt = traj([UP5, DOWN4])
    pred = traj([UP5, DOWN4])
    ok = score_task("t", pred, gt)
    assert ok.sr == 1 and ok.completeness == 1.0
    failed = score_task("t", pred, gt, error="runtime error after last action")
    assert failed.sr == 0 and failed.completeness == 1.0


def test_score_task_partial_execution_scores_prefix():
    gt = traj([UP5, DOWN4, ROT90])
    partial = traj([UP5])  # crashed after the first action
    s = score_task("t", partial, gt, error="boom")
    assert s.matches == (True, False, False)
    assert s.completeness == pytest.approx(1 / 3)
    assert s.sr == 0


def test_score_task_strict_length():
    gt = traj([UP5])
    pred = traj([UP5, DOWN4])
    strict = score_task("t", pred, gt)
    assert strict.completeness == 1.0 and strict.sr == 0
    lax = score_task("t", pred, gt, MatchConfig(strict_length=False))
    assert lax.sr == 1


def test_score_task_none_prediction():
    gt = traj([UP5, DOWN4])
    s = score_task("t", None, gt, error="did not parse")
    assert s.completeness == 0.0 and s.sr == 0 and s.error == "did not parse"
    assert s.matches == (False, False)


def test_score_task_empty_ground_truth_is_error():
    gt = traj([TKOFF])
    with pytest.raises(MetricsError):
        score_task("t", traj([UP5]), gt)


def _score(task, sr, frac, n=2):
    matches = tuple([True] * round(frac * n) + [False] * (n - round(frac * n)))
    return TaskScore(task, matches, completeness(matches), sr)


def test_aggregate_single_group():
    runs = {"run1": [_score("a", 1, 1.0), _score("b", 1, 1.0),
                     _score("c", 0, 0.0), _score("d", 1, 1.0)]}
    report = aggregate(runs, {t: "Basic" for t in "abcd"})
    assert report.run_count == 1
    (group,) = report.groups
    assert group.name == "Basic" and group.sr == 0.75


def test_aggregate_mean_over_runs_then_tasks():
    runs = {
        "r1": [_score("a", 1, 1.0)],
        "r2": [_score("a", 0, 0.5)],
        "r3": [_score("a", 1, 1.0)],
    }
    report = aggregate(runs, {"a": "g"})
    task = report.tasks[0]
    assert task.sr_mean == pytest.approx(2 / 3)
    assert round(task.sr_mean, 4) == 0.6667
    assert report.groups[0].sr == pytest.approx(2 / 3)


def test_aggregate_ungrouped_and_empty_groups():
    runs = {"r1": [_score("a", 1, 1.0), _score("mystery", 0, 0.0)]}
    report = aggregate(runs, {"a": "g", "phantom-task": "empty-group"})
    names = [g.name for g in report.groups]
    assert "ungrouped" in names and "empty-group" not in names
    assert any("mystery" in n for n in report.notes)
    assert any("empty-group" in n for n in report.notes)


def test_aggregate_requires_runs():
    with pytest.raises(MetricsError):
        aggregate({}, {})


def test_tolerance_validation():
    with pytest.raises(ValueError):
        MatchConfig(position_tolerance=0)
    with pytest.raises(ValueError):
        MatchConfig(yaw_tolerance=-1)
    with pytest.raises(ValueError):
        MatchConfig(mode="fuzzy")
