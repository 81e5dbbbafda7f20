import math

import pytest

from PyNav.Controller import PidGains, PidMemory, ackermann_convert, ackermann_invert, pid_track, tracking_errors
from PyNav.Errors import ConfigurationError, InputDomainError
from PyNav.Geometry import DriveCommand, Pose2D, Twist2D
from PyNav.Vehicle import VehicleParams, VehicleState, step_vehicle

GAINS = PidGains()


def test_gain_invariants():
    with pytest.raises(ConfigurationError):
        PidGains(kp_linear = -1.0)
    with pytest.raises(ConfigurationError):
        PidGains(integral_limit = 0.0)


def test_on_target_is_still():
    pose = Pose2D(1.0, 2.0, 0.3)
    out = pid_track(pose, Twist2D(), pose, GAINS, 0.1, PidMemory())
    assert (out.v, out.omega) == (0.0, 0.0)


def test_target_ahead_and_to_the_left():
    ahead = pid_track(Pose2D(), Twist2D(), Pose2D(1.0, 0.0, 0.0), GAINS, 0.1, PidMemory())
    assert ahead.v > 0
    assert ahead.omega == 0.0

    left = pid_track(Pose2D(), Twist2D(), Pose2D(0.0, 1.0, 0.0), GAINS, 0.1, PidMemory())
    assert left.omega > 0
    assert tracking_errors(Pose2D(), Pose2D(0.0, 1.0, 0.0)) == pytest.approx((0.0, math.pi / 2))


def test_output_limits():
    out = pid_track(Pose2D(), Twist2D(5.0, -5.0), Pose2D(0.0, -1.0, 0.0), GAINS, 0.1, PidMemory())
    assert out.v == GAINS.max_v
    assert out.omega == -GAINS.max_omega


def test_rejects_bad_dt():
    with pytest.raises(InputDomainError):
        pid_track(Pose2D(), Twist2D(), Pose2D(1, 0, 0), GAINS, 0.0, PidMemory())


def test_integrator_is_bounded(rng):
    gains = PidGains(ki_linear = 1.0, integral_limit = 0.3)
    memory = PidMemory()
    for _ in range(500):
        target = Pose2D(*rng.normal(0.0, 3.0, 2), 0.0)
        pid_track(Pose2D(), Twist2D(), target, gains, rng.uniform(0.01, 0.5), memory)
        for channel in PidMemory.CHANNELS:
            assert abs(memory.get(channel, 'integral')) <= gains.integral_limit


def test_memory_reset():
    memory = PidMemory()
    pid_track(Pose2D(), Twist2D(), Pose2D(1, 1, 0), GAINS, 0.1, memory)
    assert memory.get('angular', 'previous') is not None
    memory.reset()
    assert memory.get('angular', 'integral') == 0.0
    assert memory.get('linear', 'previous') is None


#------------------------------------------------------------------------------
# ACKERMANN
#------------------------------------------------------------------------------

def test_convert_examples():
    assert ackermann_convert(Twist2D(1.0, 0.0), 0.3, 0.5).phi == 0.0
    assert ackermann_convert(Twist2D(1.0, 1.0), 0.3, 0.5).phi == pytest.approx(math.atan(0.3))
    assert ackermann_convert(Twist2D(1.0, 0.0), 0.3, 0.5, max_speed = 0.4).v == 0.4


def test_turn_in_place_is_flagged():
    cmd = ackermann_convert(Twist2D(0.0, 0.5), 0.3, 0.5)
    assert cmd == DriveCommand(0.0, 0.5, True)
    assert ackermann_convert(Twist2D(0.0, -0.5), 0.3, 0.5).phi == -0.5


def test_round_trip():
    twist = ackermann_invert(ackermann_convert(Twist2D(1.0, 0.7), 0.3, 0.5), 0.3)
    assert abs(twist.v - 1.0) < 1e-12
    assert abs(twist.omega - 0.7) < 1e-12


def test_round_trip_fuzz(rng):
    for _ in range(1000):
        v = rng.uniform(-1.0, 1.0)
        omega = rng.uniform(-3.0, 3.0)
        cmd = ackermann_convert(Twist2D(v, omega), 0.3, 0.5, max_speed = 0.8)
        assert abs(cmd.phi) <= 0.5
        assert abs(cmd.v) <= 0.8
        back = ackermann_invert(cmd, 0.3)
        if abs(v) <= 0.8 and abs(math.atan(0.3 * omega / v)) < 0.5:
            assert back.omega == pytest.approx(omega, abs = 1e-12, rel = 1e-12)
        elif abs(v) <= 0.8:
            assert abs(back.omega) <= abs(omega)


def test_invert_domain():
    assert ackermann_invert(DriveCommand(1.0, 0.0), 0.3).omega == 0.0
    with pytest.raises(InputDomainError):
        ackermann_invert(DriveCommand(1.0, math.pi / 2), 0.3)


#------------------------------------------------------------------------------
# CLOSED LOOP
#------------------------------------------------------------------------------

def test_tracks_a_straight_line():
    params = VehicleParams()
    gains = PidGains(kp_linear = 0.0, ki_angular = 0.0)
    memory = PidMemory()
    state = VehicleState(Pose2D(0.0, 0.1, 0.0))
    dt = 0.05

    for k in range(200):
        pose = state.pose
        target = Pose2D(pose.x + 0.5, 0.0, 0.0)
        twist = pid_track(pose, Twist2D(0.5, 0.0), target, gains, dt, memory)
        cmd = ackermann_convert(twist, params.wheelbase, params.max_steer, params.max_speed)
        state = step_vehicle(state, cmd, dt, params)
        if (k + 1) * dt >= 3.0:
            assert abs(state.pose.y) < 0.02
    assert state.pose.x == pytest.approx(5.0, abs = 0.1)
