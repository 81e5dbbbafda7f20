'''
Simulated planar LIDAR.

cast_scan produces the noise-free sweep by exact ray/segment intersection.
corrupt_scan turns it into a realistic one by drawing every beam from a
four-part mixture:

    hit   - Gaussian around the true range, truncated to [0, z_max]
    short - exponential on [0, true range] (something unexpected in the way)
    max   - the beam failed and reports z_max
    rand  - uniform on [0, z_max)

The same mixture densities are what the beam sensor model scores against.
A range equal to z_max means "no return"; there is no separate mask.
'''

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, truncnorm

from PyNav.Errors import ConfigurationError, EmbeddedPoseError, InputDomainError


@dataclass(frozen = True)
class LidarConfig:
    beam_count: int = 360
    fov: float = 2.0 * math.pi
    z_max: float = 8.0
    angular_offset: float = 0.0

    def __post_init__(self):
        if self.beam_count < 2:
            raise ConfigurationError('beam_count must be at least 2')
        if not 0 < self.fov <= 2.0 * math.pi + 1e-12:
            raise ConfigurationError('fov must lie in (0, 2pi]')
        if not self.z_max > 0:
            raise ConfigurationError('z_max must be positive')

    # Beam angles in the body frame. A full circle does not repeat its
    # first beam; a partial fan includes both edges.
    def angles(self):
        if self.fov >= 2.0 * math.pi - 1e-12:
            increment = self.fov / self.beam_count
        else:
            increment = self.fov / (self.beam_count - 1)
        return self.angular_offset - 0.5 * self.fov + increment * np.arange(self.beam_count)


@dataclass(frozen = True, eq = False)
class LaserScan:
    timestamp: float
    ranges: np.ndarray
    config: LidarConfig

    def angles(self):
        return self.config.angles()

    # Beams that saw something.
    def valid(self):
        return self.ranges < self.config.z_max

    # Body-frame (x, y) of every valid beam endpoint.
    def endpoints(self, stride = 1):
        keep = np.zeros(len(self.ranges), dtype = bool)
        keep[::stride] = True
        keep &= self.valid()
        angles = self.angles()[keep]
        ranges = self.ranges[keep]
        return np.column_stack((ranges * np.cos(angles), ranges * np.sin(angles)))


@dataclass(frozen = True)
class BeamNoiseParams:
    z_hit: float = 0.9
    z_short: float = 0.03
    z_max_w: float = 0.02
    z_rand: float = 0.05
    sigma_hit: float = 0.02
    lambda_short: float = 0.5

    def __post_init__(self):
        self.validate()

    def validate(self):
        weights = self.weights()
        if min(weights) < 0:
            raise ConfigurationError('Mixture weights must be non-negative')
        if abs(sum(weights) - 1.0) > 1e-9:
            raise ConfigurationError('Mixture weights sum to %r, not 1' % sum(weights))
        if self.sigma_hit < 0:
            raise ConfigurationError('sigma_hit must be non-negative')
        if not self.lambda_short > 0:
            raise ConfigurationError('lambda_short must be positive')

    def weights(self):
        return (self.z_hit, self.z_short, self.z_max_w, self.z_rand)


# Noise-free sweep from pose.
def cast_scan(world, pose, cfg, timestamp = 0.0):
    if not world.in_bounds(pose.x, pose.y):
        raise EmbeddedPoseError('Pose (%.3f, %.3f) is outside the world' % (pose.x, pose.y))
    if world.inside_obstacle(pose.x, pose.y):
        raise EmbeddedPoseError('Pose (%.3f, %.3f) is inside an obstacle' % (pose.x, pose.y))

    ranges = world.raycast(pose.x, pose.y, pose.theta + cfg.angles(), cfg.z_max)
    return LaserScan(timestamp, ranges, cfg)


# Draws a noisy sweep from the mixture around an ideal one. Beams that had no
# return stay at z_max unless the short or random component fires.
def corrupt_scan(ideal, noise, rng):
    noise.validate()
    z_max = ideal.config.z_max
    true = np.asarray(ideal.ranges, dtype = float)
    if (true < 0).any() or (true > z_max).any():
        raise InputDomainError('Ideal ranges outside [0, z_max]')

    count = len(true)
    component = rng.choice(4, size = count, p = np.array(noise.weights()))
    uniform = rng.random(count)
    out = true.copy()

    hit = (component == 0) & (true < z_max)
    if noise.sigma_hit > 0 and hit.any():
        lower = (0.0 - true[hit]) / noise.sigma_hit
        upper = (z_max - true[hit]) / noise.sigma_hit
        out[hit] = truncnorm.rvs(lower, upper, loc = true[hit], scale = noise.sigma_hit, random_state = rng)

    short = component == 1
    if short.any():
        span = 1.0 - np.exp(-noise.lambda_short * true[short])
        out[short] = -np.log1p(-uniform[short] * span) / noise.lambda_short

    out[component == 2] = z_max

    rand = component == 3
    out[rand] = uniform[rand] * z_max

    return LaserScan(ideal.timestamp, np.clip(out, 0.0, z_max), ideal.config)


# Per-beam mixture density of measuring z when the map predicts expected.
# Vectorized over z and expected. The max-range term is a point mass at z_max.
def beam_density(z, expected, noise, z_max):
    z = np.asarray(z, dtype = float)
    expected = np.asarray(expected, dtype = float)
    inside = (z >= 0) & (z <= z_max)

    sigma = max(noise.sigma_hit, 1e-9)
    eta = norm.cdf((z_max - expected) / sigma) - norm.cdf(-expected / sigma)
    p_hit = np.where(inside, norm.pdf(z, loc = expected, scale = sigma) / np.maximum(eta, 1e-300), 0.0)

    lam = noise.lambda_short
    with np.errstate(divide = 'ignore', invalid = 'ignore'):
        p_short = lam * np.exp(-lam * z) / (-np.expm1(-lam * expected))
    p_short = np.where((z >= 0) & (z <= expected) & (expected > 0), p_short, 0.0)

    p_max = np.where(z == z_max, 1.0, 0.0)
    p_rand = np.where((z >= 0) & (z < z_max), 1.0 / z_max, 0.0)

    return noise.z_hit * p_hit + noise.z_short * p_short + noise.z_max_w * p_max + noise.z_rand * p_rand
