import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from roboforge.sim import body_to_world, normalize_yaw

finite_angles = st.floats(min_value=-1e6, max_value=1e6,
                          allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize(
    "angle, expected",
    [(270, -90), (-180, 180), (540, 180), (0, 0), (180, 180),
     (360, 0), (-90, -90), (90, 90), (-360, 0), (181, -179)],
)
def test_normalize_yaw_examples(angle, expected):
    assert normalize_yaw(angle) == pytest.approx(expected, abs=1e-12)


@given(finite_angles)
def test_normalize_yaw_range_and_idempotence(angle):
    r = normalize_yaw(angle)
    assert -180.0 < r <= 180.0
    assert normalize_yaw(r) == r


@given(finite_angles)
def test_normalize_yaw_congruence(angle):
    r = normalize_yaw(angle)
    assert math.isclose(math.fmod(r - angle, 360.0), 0.0, abs_tol=1e-6) or \
        math.isclose(abs(math.fmod(r - angle, 360.0)), 360.0, abs_tol=1e-6)


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), float("-inf")])
def test_normalize_yaw_rejects_nonfinite(bad):
    with pytest.raises(ValueError):
        normalize_yaw(bad)


def test_body_to_world_identity_at_zero_yaw():
    assert body_to_world((4, 0, 0), 0) == pytest.approx((4, 0, 0))


def test_body_to_world_forward_at_60():
    # hand check: 10*cos(60) = 5, 10*sin(60) = 8.6603
    dn, de, dd = body_to_world((10, 0, 0), 60)
    assert dn == pytest.approx(5.0, abs=1e-9)
    assert de == pytest.approx(10 * math.sin(math.radians(60)), abs=1e-12)
    assert de == pytest.approx(8.6603, abs=1e-4)
    assert dd == 0.0


def test_body_to_world_yz_diagonal():
    # top-right at 30 degrees for 10 m: (0, 10*cos30, -10*sin30)
    dn, de, dd = body_to_world((0, 8.6603, -5.0), 0)
    assert (dn, de, dd) == pytest.approx((0, 8.6603, -5.0))


def test_body_to_world_matches_rotation_matrix_oracle():
    rng = random.Random(20240817)
    for _ in range(500):
        f = rng.uniform(-50, 50)
        r = rng.uniform(-50, 50)
        d = rng.uniform(-50, 50)
        yaw = rng.uniform(-720, 720)
        rad = np.deg2rad(normalize_yaw(yaw))
        rot = np.array([[np.cos(rad), -np.sin(rad)], [np.sin(rad), np.cos(rad)]])
        expected = rot @ np.array([f, r])
        dn, de, dd = body_to_world((f, r, d), yaw)
        assert dn == pytest.approx(expected[0], abs=1e-9)
        assert de == pytest.approx(expected[1], abs=1e-9)
        assert dd == d


@given(
    st.floats(-100, 100), st.floats(-100, 100), st.floats(-100, 100),
    st.floats(-360, 360),
)
def test_body_to_world_preserves_horizontal_norm(f, r, d, yaw):
    dn, de, _ = body_to_world((f, r, d), yaw)
    assert math.hypot(dn, de) == pytest.approx(math.hypot(f, r), abs=1e-9)


@given(
    st.floats(-100, 100), st.floats(-100, 100), st.floats(-100, 100),
    st.floats(-360, 360),
)
def test_body_to_world_inverse_motion(f, r, d, yaw):
    there = body_to_world((f, r, d), yaw)
    back = body_to_world((-f, -r, -d), yaw)
    for a, b in zip(there, back):
        assert a + b == pytest.approx(0.0, abs=1e-9)


def test_body_to_world_rejects_nonfinite():
    with pytest.raises(ValueError):
        body_to_world((float("nan"), 0, 0), 0)
