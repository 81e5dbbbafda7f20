'''
Waypoint tracking and the twist-to-steering conversion.

pid_track adds a PID correction to the local planner's feedforward twist:
the linear channel works on the distance to the target along the current
heading, the angular channel on the wrapped bearing to the target.
ackermann_convert then turns (v, omega) into the (v, phi) a car can take,
via phi = atan(wheelbase / r) with r = v / omega.
'''

import math
from dataclasses import dataclass

from PyNav.Errors import ConfigurationError, InputDomainError
from PyNav.Geometry import DriveCommand, Twist2D, require_finite, wrap_angle
from PyNav.Vehicle import clamp


@dataclass(frozen = True)
class PidGains:
    kp_linear: float = 1.0
    ki_linear: float = 0.0
    kd_linear: float = 0.0
    kp_angular: float = 2.0
    ki_angular: float = 0.1
    kd_angular: float = 0.0
    integral_limit: float = 1.0
    max_v: float = 1.0
    max_omega: float = 2.0

    def __post_init__(self):
        gains = (self.kp_linear, self.ki_linear, self.kd_linear, self.kp_angular, self.ki_angular, self.kd_angular)
        if min(gains) < 0:
            raise ConfigurationError('PID gains must be non-negative')
        if not self.integral_limit > 0:
            raise ConfigurationError('integral_limit must be positive')
        if not self.max_v > 0 or not self.max_omega > 0:
            raise ConfigurationError('Output limits must be positive')


# Integrator and last error per channel, carried between pid_track calls.
# Starts empty: no integral and no derivative on the first call.
class PidMemory:
    CHANNELS = ('linear', 'angular')

    def __init__(self):
        self._state = {}
        self.reset()

    def get(self, channel, key):
        return self._state[channel][key]

    def set(self, channel, key, value):
        self._state[channel][key] = value

    def reset(self):
        self._state = {channel: {'integral': 0.0, 'previous': None} for channel in PidMemory.CHANNELS}


def _channel(memory, channel, error, kp, ki, kd, limit, dt):
    integral = clamp(memory.get(channel, 'integral') + error * dt, limit)
    previous = memory.get(channel, 'previous')
    derivative = 0.0 if previous is None else (error - previous) / dt

    memory.set(channel, 'integral', integral)
    memory.set(channel, 'previous', error)
    return kp * error + ki * integral + kd * derivative


def tracking_errors(current, target):
    dx, dy = target.x - current.x, target.y - current.y
    along = dx * math.cos(current.theta) + dy * math.sin(current.theta)
    if math.hypot(dx, dy) < 1e-9:
        return along, 0.0
    return along, wrap_angle(math.atan2(dy, dx) - current.theta)


def pid_track(current, feedforward, target, gains, dt, memory):
    require_finite(dt)
    if not dt > 0:
        raise InputDomainError('dt must be positive, got %r' % dt)

    along, bearing = tracking_errors(current, target)
    v = feedforward.v + _channel(
        memory, 'linear', along,
        gains.kp_linear, gains.ki_linear, gains.kd_linear, gains.integral_limit, dt
    )
    omega = feedforward.omega + _channel(
        memory, 'angular', bearing,
        gains.kp_angular, gains.ki_angular, gains.kd_angular, gains.integral_limit, dt
    )

    return Twist2D(clamp(v, gains.max_v), clamp(omega, gains.max_omega))


def ackermann_convert(twist, wheelbase, max_steer, max_speed = None):
    v = twist.v if max_speed is None else clamp(twist.v, max_speed)

    if twist.omega == 0.0:
        return DriveCommand(v, 0.0)

    # A car cannot turn in place: steer fully toward the turn and flag it.
    if v == 0.0:
        return DriveCommand(0.0, math.copysign(max_steer, twist.omega), True)

    return DriveCommand(v, clamp(math.atan(wheelbase * twist.omega / v), max_steer))


def ackermann_invert(cmd, wheelbase):
    if not abs(cmd.phi) < math.pi / 2:
        raise InputDomainError('Steering angle must lie in (-pi/2, pi/2)')
    return Twist2D(cmd.v, cmd.v * math.tan(cmd.phi) / wheelbase)
