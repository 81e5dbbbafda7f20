import math

import numpy as np
import pytest

from PyNav.Geometry import Pose2D, arc_advance, arc_jacobian, wrap_angle, wrap_angles


def test_wrap_angle_half_open_interval():
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)
    assert wrap_angle(0.5) == 0.5
    assert wrap_angle(-7.0) == pytest.approx(-7.0 + 2 * math.pi)


def test_wrap_angles_matches_scalar(rng):
    angles = rng.uniform(-50, 50, 1000)
    expected = [wrap_angle(a) for a in angles]
    assert np.allclose(wrap_angles(angles), expected, atol = 1e-12)
    assert (wrap_angles(angles) > -math.pi).all()
    assert (wrap_angles(angles) <= math.pi).all()


def test_pose_normalizes_theta():
    assert Pose2D(0, 0, 4 * math.pi + 0.25).theta == pytest.approx(0.25)


def test_compose_and_relative_are_inverse(rng):
    for _ in range(50):
        a = Pose2D(*rng.uniform(-5, 5, 3))
        b = Pose2D(*rng.uniform(-5, 5, 3))
        back = a.compose(a.relative(b))
        assert back.x == pytest.approx(b.x, abs = 1e-12)
        assert back.y == pytest.approx(b.y, abs = 1e-12)
        assert wrap_angle(back.theta - b.theta) == pytest.approx(0.0, abs = 1e-12)


def test_transform_points():
    pose = Pose2D(1.0, 2.0, math.pi / 2)
    assert np.allclose(pose.transform_points([[1.0, 0.0]]), [[1.0, 3.0]])


def test_arc_advance_straight_and_turn():
    straight = arc_advance(Pose2D(), 1.0, 0.0, 2.0)
    assert (straight.x, straight.y, straight.theta) == (2.0, 0.0, 0.0)

    quarter = arc_advance(Pose2D(), 1.0, 1.0, math.pi / 2)
    assert quarter.x == pytest.approx(1.0, abs = 1e-12)
    assert quarter.y == pytest.approx(1.0, abs = 1e-12)
    assert quarter.theta == pytest.approx(math.pi / 2)


def test_arc_jacobian_against_finite_differences(rng):
    for _ in range(50):
        theta, v, omega = rng.uniform(-3, 3), rng.uniform(-1, 1), rng.uniform(-2, 2)
        dt = 0.1
        analytic = arc_jacobian(theta, v, omega, dt)

        def f(args):
            pose = arc_advance(Pose2D(0.0, 0.0, args[0]), args[1], args[2], dt)
            return np.array([pose.x, pose.y, args[0] + args[2] * dt])

        h = 1e-6
        numeric = np.zeros((3, 3))
        base = np.array([theta, v, omega])
        for k in range(3):
            step = np.zeros(3)
            step[k] = h
            numeric[:, k] = (f(base + step) - f(base - step)) / (2 * h)
        assert np.abs(analytic - numeric).max() < 1e-5
