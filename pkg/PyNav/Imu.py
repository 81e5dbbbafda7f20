'''
Simulated IMU, synthesized from ground-truth finite differences plus white
Gaussian noise. There is no bias model.
'''

from dataclasses import dataclass

from PyNav.Errors import InputDomainError
from PyNav.Geometry import require_finite, wrap_angle


@dataclass(frozen = True)
class ImuSample:
    timestamp: float
    yaw_rate: float
    linear_accel: float


# noise_std is (yaw rate std in rad/s, forward acceleration std in m/s^2).
def sample_imu(prev, curr, dt, noise_std, rng, timestamp = 0.0):
    require_finite(dt, prev.speed, curr.speed, prev.pose.theta, curr.pose.theta)
    if not dt > 0:
        raise InputDomainError('dt must be positive, got %r' % dt)

    yaw_std, accel_std = noise_std
    draws = rng.standard_normal(2)
    yaw_rate = wrap_angle(curr.pose.theta - prev.pose.theta) / dt + yaw_std * draws[0]
    accel = (curr.speed - prev.speed) / dt + accel_std * draws[1]

    return ImuSample(timestamp, yaw_rate, accel)
