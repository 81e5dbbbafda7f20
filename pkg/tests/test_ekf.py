import math

import numpy as np
import pytest

from PyNav.Ekf import EkfState, FusionFilter, ekf_predict, ekf_update, motion_jacobian, motion_model
from PyNav.Errors import InputDomainError
from PyNav.Geometry import DriveCommand, Pose2D, Twist2D
from PyNav.Vehicle import VehicleParams, VehicleState, step_vehicle


def _state(pose = Pose2D(), twist = Twist2D(), cov = None):
    return EkfState.at(pose, twist, np.diag([0.1, 0.1, 0.05, 0.2, 0.2]) if cov is None else cov)


def _check_covariance(state):
    P = state.covariance
    assert np.abs(P - P.T).max() < 1e-9
    assert np.linalg.eigvalsh(P).min() >= -1e-9


def test_still_state_without_noise():
    state = _state()
    out = ekf_predict(state, 0.1, np.zeros((5, 5)))
    assert np.array_equal(out.mean, state.mean)
    assert np.allclose(out.covariance, state.covariance)


def test_process_noise_adds_q_dt():
    state = _state(cov = np.zeros((5, 5)))
    q = np.diag([1.0, 2.0, 3.0, 4.0, 5.0])
    out = ekf_predict(state, 0.5, q)
    assert np.allclose(np.diag(out.covariance), 0.5 * np.diag(q))


def test_predict_rejects_bad_dt():
    with pytest.raises(InputDomainError):
        ekf_predict(_state(), 0.0, np.zeros((5, 5)))


def test_jacobian_against_finite_differences(rng):
    for _ in range(20):
        mean = np.concatenate((rng.uniform(-5, 5, 2), rng.uniform(-3, 3, 1), rng.uniform(-1, 1, 2)))
        dt = 0.1
        h = 1e-6
        numeric = np.zeros((5, 5))
        for k in range(5):
            step = np.zeros(5)
            step[k] = h
            diff = motion_model(mean + step, dt) - motion_model(mean - step, dt)
            diff[2] = math.remainder(diff[2], 2 * math.pi)
            numeric[:, k] = diff / (2 * h)
        assert np.abs(motion_jacobian(mean, dt) - numeric).max() < 1e-5


def test_zero_innovation_shrinks_trace():
    state = _state(Pose2D(1, 2, 0.3))
    out, accepted = ekf_update(state, [1, 2, 0.3], 'mcl_pose', np.diag([0.01, 0.01, 0.01]))
    assert accepted
    assert np.allclose(out.mean, state.mean)
    assert np.trace(out.covariance) < np.trace(state.covariance)
    _check_covariance(out)


def test_perfect_measurement_pins_the_pose():
    state = _state(Pose2D(1, 2, 0.3))
    z = [1.1, 1.95, 0.35]
    out, accepted = ekf_update(state, z, 'mcl_pose', 1e-12 * np.eye(3))
    assert accepted
    assert np.allclose(out.mean[:3], z, atol = 1e-6)


def test_pose_innovation_wraps():
    state = _state(Pose2D(0, 0, 3.1), cov = np.diag([0.1, 0.1, 0.1, 0.1, 0.1]))
    out, accepted = ekf_update(state, [0.0, 0.0, -3.1], 'mcl_pose', np.diag([0.1, 0.1, 0.1]))
    assert accepted
    # Halfway between the prediction and the measurement, across the seam.
    assert math.remainder(out.mean[2] - (3.1 + 0.5 * (2 * math.pi - 6.2)), 2 * math.pi) == pytest.approx(0.0, abs = 1e-9)


def test_gate_rejects_outliers():
    state = _state(cov = np.diag([0.01, 0.01, 0.01, 0.01, 0.01]))
    out, accepted = ekf_update(state, [5.0, 5.0, 0.0], 'mcl_pose', np.diag([0.01, 0.01, 0.01]))
    assert not accepted
    assert out is state


def test_update_checks_dimensions():
    with pytest.raises(InputDomainError):
        ekf_update(_state(), [1.0, 2.0], 'mcl_pose', np.eye(2))
    with pytest.raises(InputDomainError):
        ekf_update(_state(), [1.0], 'wheel_odometry', np.eye(1))


def test_trace_never_increases(rng):
    state = _state()
    for _ in range(200):
        state = ekf_predict(state, 0.05, np.diag([0.001, 0.001, 0.001, 0.1, 0.1]))
        _check_covariance(state)
        before = np.trace(state.covariance)
        model = ['scan_match_twist', 'imu_yaw_rate', 'mcl_pose'][rng.integers(3)]
        size = {'scan_match_twist': 2, 'imu_yaw_rate': 1, 'mcl_pose': 3}[model]
        z = state.mean[{'scan_match_twist': [3, 4], 'imu_yaw_rate': [4], 'mcl_pose': [0, 1, 2]}[model]]
        state, _ = ekf_update(state, z + 0.01 * rng.standard_normal(size), model, 0.01 * np.eye(size))
        _check_covariance(state)
        assert np.trace(state.covariance) <= before + 1e-12


def test_tracks_ground_truth_with_exact_measurements():
    params = VehicleParams()
    truth = VehicleState(Pose2D(1.0, 1.0, 0.2))
    fusion = FusionFilter(
        EkfState.at(truth.pose, covariance = [0.0, 0.0, 0.0, 1.0, 1.0]),
        [1e-4, 1e-4, 1e-4, 1e-2, 1e-2], [1e-12, 1e-12], 1e-12, [1e-12, 1e-12, 1e-12],
    )
    dt = 0.05
    for k in range(100):
        cmd = DriveCommand(0.5, 0.3 * math.sin(0.1 * k))
        truth = step_vehicle(truth, cmd, dt, params)
        fusion.predict(dt)
        omega = truth.speed * math.tan(truth.steer) / params.wheelbase
        fusion.update_twist(Twist2D(truth.speed, omega))
        fusion.update_yaw_rate(omega)
        fusion.update_pose(truth.pose)
        assert fusion.state.pose().distance_to(truth.pose) < 1e-6
    assert fusion.rejected == 0


def test_pose_resets_after_repeated_rejections():
    fusion = FusionFilter(
        EkfState.at(Pose2D(1.0, 1.0, 0.0), Twist2D(0.5, 0.1), [1e-4, 1e-4, 1e-4, 0.01, 0.01]),
        [1e-3] * 5, [0.01, 0.01], 0.01, [0.01, 0.01, 0.005], max_pose_rejections = 3,
    )
    far = Pose2D(3.0, 2.0, 1.0)
    assert not fusion.update_pose(far)
    assert not fusion.update_pose(far)
    assert fusion.state.pose() == Pose2D(1.0, 1.0, 0.0)

    assert not fusion.update_pose(far)
    assert fusion.resets == 1
    assert fusion.state.pose() == far
    assert fusion.state.twist() == Twist2D(0.5, 0.1)
    assert np.allclose(fusion.state.covariance[0:3, 0:3], np.diag([0.01, 0.01, 0.005]))
    assert np.all(fusion.state.covariance[0:3, 3:5] == 0.0)
    _check_covariance(fusion.state)

    # Agreeing fixes are taken again and clear the count.
    assert fusion.update_pose(Pose2D(3.01, 2.0, 1.0))
    assert fusion.pose_rejections == 0


def test_no_reset_without_a_limit():
    fusion = FusionFilter(
        EkfState.at(Pose2D(), covariance = [1e-4] * 5), [1e-3] * 5, [0.01, 0.01], 0.01, [0.01, 0.01, 0.005],
    )
    for _ in range(10):
        fusion.update_pose(Pose2D(5.0, 5.0, 0.0))
    assert fusion.resets == 0
    assert fusion.state.pose() == Pose2D()
