'''
Car-like vehicle: bicycle kinematics with the rear axle as reference point.

    x' = v cos(theta),  y' = v sin(theta),  theta' = v tan(phi) / wheelbase

A DriveCommand is held constant over a step, so the motion is an exact arc.
'''

import math
from dataclasses import dataclass, field

from PyNav.Errors import ConfigurationError, InputDomainError
from PyNav.Geometry import Pose2D, arc_advance, require_finite


@dataclass(frozen = True)
class VehicleParams:
    wheelbase: float = 0.3
    max_speed: float = 1.0
    max_accel: float = 2.0
    max_steer: float = 0.5
    footprint_radius_inscribed: float = 0.15
    footprint_radius_circumscribed: float = 0.25

    def __post_init__(self):
        if not self.wheelbase > 0:
            raise ConfigurationError('wheelbase must be positive')
        if not 0 < self.max_steer < math.pi / 2:
            raise ConfigurationError('max_steer must lie in (0, pi/2)')
        if self.footprint_radius_inscribed > self.footprint_radius_circumscribed:
            raise ConfigurationError('inscribed radius exceeds circumscribed radius')

    # Tightest turn the steering allows.
    def min_turn_radius(self):
        return self.wheelbase / math.tan(self.max_steer)


@dataclass(frozen = True)
class VehicleState:
    pose: Pose2D = field(default_factory = Pose2D)
    speed: float = 0.0
    steer: float = 0.0


def clamp(value, limit):
    return max(-limit, min(limit, value))


# Advances the vehicle by dt under cmd. The command is clamped to the
# vehicle's speed and steering limits before it is applied.
def step_vehicle(state, cmd, dt, params):
    require_finite(cmd.v, cmd.phi, dt, state.pose.x, state.pose.y, state.pose.theta)
    if not dt > 0:
        raise InputDomainError('dt must be positive, got %r' % dt)

    speed = clamp(cmd.v, params.max_speed)
    steer = clamp(cmd.phi, params.max_steer)
    omega = speed * math.tan(steer) / params.wheelbase

    return VehicleState(arc_advance(state.pose, speed, omega, dt), speed, steer)
