'''
Relative-motion bookkeeping.

An odometry step between two poses is decomposed into a rotation, a
straight-line translation and a second rotation. The particle filter's
motion model perturbs exactly those three numbers. Dead reckoning goes the
other way and integrates an IMU into a pose.
'''

import math
from dataclasses import dataclass, field

import numpy as np

from PyNav.Errors import ConfigurationError, InputDomainError
from PyNav.Geometry import Pose2D, arc_advance, require_finite, wrap_angle, wrap_angles

# Below this translation the step is treated as a pure rotation.
PURE_ROTATION = 1e-6


@dataclass(frozen = True)
class OdometryDelta:
    rot1: float = 0.0
    trans: float = 0.0
    rot2: float = 0.0
    covariance: np.ndarray = field(default_factory = lambda: np.zeros((3, 3)), compare = False)

    def __post_init__(self):
        cov = np.asarray(self.covariance, dtype = float)
        if cov.shape != (3, 3):
            raise InputDomainError('Odometry covariance must be 3x3')
        if np.abs(cov - cov.T).max() > 1e-12 or np.linalg.eigvalsh(cov).min() < -1e-12:
            raise InputDomainError('Odometry covariance must be symmetric PSD')

    def as_tuple(self):
        return (self.rot1, self.trans, self.rot2)


@dataclass(frozen = True)
class MotionNoiseParams:
    a1: float = 0.0
    a2: float = 0.0
    a3: float = 0.0
    a4: float = 0.0

    def __post_init__(self):
        if min(self.a1, self.a2, self.a3, self.a4) < 0:
            raise ConfigurationError('Motion noise coefficients must be non-negative')


def odometry_delta(prev, curr):
    dx, dy = curr.x - prev.x, curr.y - prev.y
    trans = math.hypot(dx, dy)
    if trans < PURE_ROTATION:
        rot1 = 0.0
    else:
        rot1 = wrap_angle(math.atan2(dy, dx) - prev.theta)
    rot2 = wrap_angle(curr.theta - prev.theta - rot1)
    return OdometryDelta(rot1, trans, rot2)


# Samples successor poses for an (N, 3) array of poses in one draw. Each
# component of the delta gets zero-mean Gaussian noise whose variance grows
# with the size of the motion.
def sample_motion_model_odometry_many(poses, delta, noise, rng):
    poses = np.asarray(poses, dtype = float)
    rot1, trans, rot2 = delta.as_tuple() if isinstance(delta, OdometryDelta) else delta

    std_rot1 = math.sqrt(noise.a1 * rot1 ** 2 + noise.a2 * trans ** 2)
    std_trans = math.sqrt(noise.a3 * trans ** 2 + noise.a4 * (rot1 ** 2 + rot2 ** 2))
    std_rot2 = math.sqrt(noise.a1 * rot2 ** 2 + noise.a2 * trans ** 2)

    draws = rng.standard_normal((len(poses), 3))
    hat_rot1 = rot1 + std_rot1 * draws[:, 0]
    hat_trans = trans + std_trans * draws[:, 1]
    hat_rot2 = rot2 + std_rot2 * draws[:, 2]

    heading = poses[:, 2] + hat_rot1
    out = np.empty_like(poses)
    out[:, 0] = poses[:, 0] + hat_trans * np.cos(heading)
    out[:, 1] = poses[:, 1] + hat_trans * np.sin(heading)
    out[:, 2] = wrap_angles(heading + hat_rot2)
    return out


def sample_motion_model_odometry(pose, delta, noise, rng):
    return Pose2D.from_array(sample_motion_model_odometry_many(pose.as_array()[None, :], delta, noise, rng)[0])


# Integrates one IMU sample. The forward speed comes from twist_est.v plus the
# measured acceleration (trapezoidal over dt); heading from the gyro.
def dead_reckon(state, twist_est, imu, dt):
    require_finite(dt, twist_est.v, imu.yaw_rate, imu.linear_accel)
    if not dt > 0:
        raise InputDomainError('dt must be positive, got %r' % dt)

    v_mean = twist_est.v + 0.5 * imu.linear_accel * dt
    return arc_advance(state, v_mean, imu.yaw_rate, dt)

