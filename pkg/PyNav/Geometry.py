'''
Planar kinematic quantities shared by every stage of the pipeline: poses,
velocities, drive commands, and exact constant-curvature integration.

Angles are radians and always live in (-pi, pi] once stored in a Pose2D.
'''

import math
from dataclasses import dataclass

import numpy as np

from PyNav.Errors import InputDomainError

TWO_PI = 2.0 * math.pi


# Wraps an angle into (-pi, pi].
def wrap_angle(angle):
    wrapped = math.remainder(angle, TWO_PI)
    if wrapped <= -math.pi:
        wrapped += TWO_PI
    return wrapped


# Vectorized wrap_angle for numpy arrays.
def wrap_angles(angles):
    wrapped = np.remainder(np.asarray(angles, dtype = float) + math.pi, TWO_PI) - math.pi
    return np.where(wrapped <= -math.pi, wrapped + TWO_PI, wrapped)


def require_finite(*values):
    for value in values:
        if not math.isfinite(value):
            raise InputDomainError('Non-finite input %r' % (value,))


@dataclass(frozen = True)
class Pose2D:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'theta', wrap_angle(float(self.theta)))

    def as_array(self):
        return np.array([self.x, self.y, self.theta])

    @staticmethod
    def from_array(values):
        return Pose2D(float(values[0]), float(values[1]), float(values[2]))

    def distance_to(self, other):
        return math.hypot(other.x - self.x, other.y - self.y)

    # self (+) other: other is expressed in self's frame.
    def compose(self, other):
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose2D(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta
        )

    def inverse(self):
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose2D(
            -c * self.x - s * self.y,
            s * self.x - c * self.y,
            -self.theta
        )

    # The pose of other expressed in self's frame, so that
    # self.compose(self.relative(other)) == other.
    def relative(self, other):
        return self.inverse().compose(other)

    # Maps body-frame points (N x 2) into the world.
    def transform_points(self, points):
        c, s = math.cos(self.theta), math.sin(self.theta)
        points = np.asarray(points, dtype = float)
        return np.column_stack((
            self.x + c * points[:, 0] - s * points[:, 1],
            self.y + s * points[:, 0] + c * points[:, 1],
        ))


@dataclass(frozen = True)
class Twist2D:
    v: float = 0.0
    omega: float = 0.0


# What the vehicle actually accepts: speed and steering angle. infeasible is
# set when the requested twist could not be realized (turning in place).
@dataclass(frozen = True)
class DriveCommand:
    v: float = 0.0
    phi: float = 0.0
    infeasible: bool = False


# sin(u)/u and its derivative, with series near zero.
def sinc(u):
    if abs(u) < 1e-4:
        return 1.0 - u * u / 6.0
    return math.sin(u) / u


def dsinc(u):
    if abs(u) < 1e-4:
        return -u / 3.0 + u ** 3 / 30.0
    return (u * math.cos(u) - math.sin(u)) / (u * u)


# Exact constant-curvature motion over dt. The chord form
#     p' = p + v*dt*sinc(w*dt/2) * (cos, sin)(theta + w*dt/2)
# is the closed-form arc and stays well conditioned as w -> 0.
def arc_advance(pose, v, omega, dt):
    half = 0.5 * omega * dt
    chord = v * dt * sinc(half)
    heading = pose.theta + half
    return Pose2D(
        pose.x + chord * math.cos(heading),
        pose.y + chord * math.sin(heading),
        pose.theta + omega * dt
    )


# Partial derivatives of arc_advance's (x, y, theta) with respect to
# (theta, v, omega). Position does not depend on the others except additively.
def arc_jacobian(theta, v, omega, dt):
    half = 0.5 * omega * dt
    c = sinc(half)
    dc = dsinc(half)
    heading = theta + half
    ch, sh = math.cos(heading), math.sin(heading)
    chord = v * dt * c
    dchord_domega = v * dt * dc * 0.5 * dt

    return np.array([
        [-chord * sh, dt * c * ch, dchord_domega * ch - chord * sh * 0.5 * dt],
        [chord * ch, dt * c * sh, dchord_domega * sh + chord * ch * 0.5 * dt],
        [1.0, 0.0, dt],
    ])
