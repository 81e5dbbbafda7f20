'''
Adaptive Monte Carlo localization.

One filter step:

    1. move every particle by a noisy copy of the odometry delta
    2. weight it with the configured sensor model
    3. track short- and long-term averages of the measurement likelihood
    4. resample with low variance; a draw is replaced by a random pose in free
       space with probability max(0, 1 - w_fast / w_slow)
    5. stop drawing once the KLD bound for the occupied histogram bins is met,
       never outside [n_min, n_max]

Particles live in numpy arrays: poses (N, 3) and weights (N,).
'''

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.stats import norm

from PyNav.Config import Config
from PyNav.Debug import DEBUG
from PyNav.Errors import ConfigurationError, DegenerateWeightsError, InputDomainError
from PyNav.Geometry import Pose2D, wrap_angles
from PyNav.Odometry import MotionNoiseParams, odometry_delta, sample_motion_model_odometry_many


@dataclass(eq = False)
class ParticleSet:
    poses: np.ndarray
    weights: np.ndarray = None
    w_slow: float = 0.0
    w_fast: float = 0.0

    def __post_init__(self):
        self.poses = np.atleast_2d(np.asarray(self.poses, dtype = float))
        if self.weights is None:
            self.weights = np.full(len(self.poses), 1.0 / len(self.poses))
        self.weights = np.asarray(self.weights, dtype = float)
        if len(self.weights) != len(self.poses):
            raise InputDomainError('One weight per particle')
        if not np.isfinite(self.weights).all() or (self.weights < 0).any():
            raise InputDomainError('Particle weights must be finite and non-negative')

    def __len__(self):
        return len(self.poses)

    @staticmethod
    def around(pose, spread, count, rng):
        draws = rng.standard_normal((count, 3)) * np.asarray(spread, dtype = float)
        poses = pose.as_array()[None, :] + draws
        poses[:, 2] = wrap_angles(poses[:, 2])
        return ParticleSet(poses)

    @staticmethod
    def uniform(grid, count, rng):
        return ParticleSet(random_free_poses(grid, count, rng))


@dataclass(frozen = True)
class AugmentedParams:
    alpha_slow: float = 0.001
    alpha_fast: float = 0.1

    def __post_init__(self):
        # Both zero switches injection off.
        if self.alpha_slow == 0.0 and self.alpha_fast == 0.0:
            return
        if not 0 < self.alpha_slow < self.alpha_fast <= 1:
            raise ConfigurationError('Need 0 < alpha_slow < alpha_fast <= 1')


@dataclass(frozen = True)
class KldParams:
    epsilon: float = 0.05
    delta: float = 0.01
    bin_size: tuple = (0.25, 0.25, math.radians(10.0))
    n_min: int = 100
    n_max: int = 5000

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigurationError('epsilon must be positive')
        if not 0 < self.delta < 1:
            raise ConfigurationError('delta must lie in (0, 1)')
        if self.n_min < 10 or self.n_max < self.n_min:
            raise ConfigurationError('Need 10 <= n_min <= n_max')
        if min(self.bin_size) <= 0:
            raise ConfigurationError('KLD bins must have positive size')


@dataclass(frozen = True)
class MclParams:
    motion: MotionNoiseParams = field(default_factory = MotionNoiseParams)
    augmented: AugmentedParams = field(default_factory = AugmentedParams)
    kld: KldParams = field(default_factory = KldParams)


#------------------------------------------------------------------------------
# SAMPLING HELPERS
#------------------------------------------------------------------------------

# Uniform poses over the free cells of grid: a random free cell, a random
# point inside it, a random heading.
def random_free_poses(grid, count, rng):
    rows, cols = np.nonzero(grid.free_mask())
    if len(rows) == 0:
        raise ConfigurationError('Map has no free cells to place particles in')

    pick = rng.integers(0, len(rows), size = count)
    jitter = rng.random((count, 2))
    cells = np.column_stack((cols[pick] + jitter[:, 0], rows[pick] + jitter[:, 1]))
    xy = grid.to_world(cells)
    theta = rng.uniform(-math.pi, math.pi, size = count)
    return np.column_stack((xy, theta))


@lru_cache(maxsize = 4096)
def _kld_bound(k, epsilon, delta):
    z = norm.ppf(1.0 - delta)
    a = 2.0 / (9.0 * (k - 1))
    return (k - 1) / (2.0 * epsilon) * (1.0 - a + math.sqrt(a) * z) ** 3


def kld_required_samples(k, kld):
    if k < 0:
        raise InputDomainError('Bin count must be non-negative')
    if k <= 1:
        return kld.n_min
    n = int(math.ceil(_kld_bound(int(k), kld.epsilon, kld.delta)))
    return max(kld.n_min, min(kld.n_max, n))


def kld_bins(poses, bin_size):
    keys = np.floor(poses / np.asarray(bin_size, dtype = float)).astype(np.int64)
    return [tuple(key) for key in keys]


def injection_probability(w_slow, w_fast):
    if w_slow <= 0:
        return 0.0
    return max(0.0, 1.0 - w_fast / w_slow)


# Low-variance resampling: one uniform offset, n evenly spaced pointers into
# the cumulative weights.
def low_variance_indices(weights, n, rng):
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    positions = (rng.random() + np.arange(n)) / n
    return np.minimum(np.searchsorted(cumulative, positions, side = 'right'), len(weights) - 1)


#------------------------------------------------------------------------------
# FILTER STEPS
#------------------------------------------------------------------------------

# Weights particles by the sensor model. Returns the normalized weights and
# the per-beam mean likelihood w_avg that drives the augmented averages.
def weigh(poses, scan, sensor):
    ll = sensor.log_likelihoods(poses, scan)
    best = ll.max()
    if not math.isfinite(best):
        raise DegenerateWeightsError('Every particle has zero likelihood')

    weights = np.exp(ll - best)
    total = weights.sum()
    if not total > 0:
        raise DegenerateWeightsError('Particle weights sum to zero')

    used = sensor.used_beams(scan)
    w_avg = float(np.exp(ll / used).mean()) if used else 1.0
    return weights / total, w_avg


def update_averages(particles, w_avg, params):
    # The first measurement seeds both averages.
    if particles.w_slow == 0.0 and particles.w_fast == 0.0:
        return w_avg, w_avg
    w_slow = particles.w_slow + params.alpha_slow * (w_avg - particles.w_slow)
    w_fast = particles.w_fast + params.alpha_fast * (w_avg - particles.w_fast)
    return w_slow, w_fast


# KLD-adaptive low-variance resampling with random injection. The pointer
# order is shuffled so an early stop does not favour the low-index particles.
def resample(particles, grid, kld, rng):
    probability = injection_probability(particles.w_slow, particles.w_fast)
    pointers = low_variance_indices(particles.weights, kld.n_max, rng)[rng.permutation(kld.n_max)]
    inject = rng.random(kld.n_max) < probability

    candidates = particles.poses[pointers].copy()
    if inject.any():
        candidates[inject] = random_free_poses(grid, int(inject.sum()), rng)

    bins = set()
    count = kld.n_max
    for i, key in enumerate(kld_bins(candidates, kld.bin_size)):
        bins.add(key)
        drawn = i + 1
        if drawn >= kld.n_min and drawn >= kld_required_samples(len(bins), kld):
            count = drawn
            break

    injected = int(inject[:count].sum())
    DEBUG.write('MCL resampled %d particles (%d bins, %d injected, p=%.3f)' % (count, len(bins), injected, probability))
    return ParticleSet(candidates[:count], None, particles.w_slow, particles.w_fast)


# Weighted mean pose and covariance. Heading uses the circular mean and
# wrapped residuals.
def estimate_pose(particles):
    weights = np.asarray(particles.weights, dtype = float)
    total = weights.sum()
    if len(weights) == 0 or not total > 0:
        raise DegenerateWeightsError('Cannot estimate a pose from zero weights')
    weights = weights / total

    poses = particles.poses
    x = float(weights @ poses[:, 0])
    y = float(weights @ poses[:, 1])
    theta = math.atan2(float(weights @ np.sin(poses[:, 2])), float(weights @ np.cos(poses[:, 2])))

    residuals = np.column_stack((poses[:, 0] - x, poses[:, 1] - y, wrap_angles(poses[:, 2] - theta)))
    covariance = (residuals * weights[:, None]).T @ residuals
    return Pose2D(x, y, theta), 0.5 * (covariance + covariance.T)


def augmented_mcl_step(particles, delta, scan, grid, sensor, params, rng):
    moved = sample_motion_model_odometry_many(particles.poses, delta, params.motion, rng)
    weights, w_avg = weigh(moved, scan, sensor)
    w_slow, w_fast = update_averages(particles, w_avg, params.augmented)
    return resample(ParticleSet(moved, weights, w_slow, w_fast), grid, params.kld, rng)


#------------------------------------------------------------------------------
# LOCALIZER
#------------------------------------------------------------------------------

# Owns a particle set and decides when to run the filter. Odometry poses come
# from the vehicle's odometry frame; the filter only runs once they have moved
# update_min_d meters or turned update_min_a radians since the last update.
# Between updates the estimate is carried forward by the odometry.
class Localizer:
    def __init__(self, grid, sensor, params, rng, particles, odometry, update_min_d = 0.1, update_min_a = 0.2):
        self.grid = grid
        self.sensor = sensor
        self.params = params
        self.rng = rng
        self.particles = particles
        self.update_min_d = update_min_d
        self.update_min_a = update_min_a
        self.updates = 0

        self._last_odometry = odometry
        self._pose, self.covariance = estimate_pose(particles)

    @staticmethod
    def from_config(grid, config, rng, start, odometry = None):
        params = MclParams(
            MotionNoiseParams(
                config.get('mcl', 'a1'), config.get('mcl', 'a2'),
                config.get('mcl', 'a3'), config.get('mcl', 'a4'),
            ),
            AugmentedParams(config.get('mcl', 'alpha_slow'), config.get('mcl', 'alpha_fast')),
            KldParams(
                config.get('mcl', 'epsilon'), config.get('mcl', 'delta'),
                tuple(config.get('mcl', 'bin_size')),
                config.get('mcl', 'n_min'), config.get('mcl', 'n_max'),
            ),
        )
        sensor = Config.sensor_model(config.get('mcl', 'sensor_model')).from_config(grid, config)

        mode = config.get('mcl', 'init')
        if mode == 'tracking':
            particles = ParticleSet.around(start, config.get('mcl', 'init_spread'), config.get('mcl', 'init_particles'), rng)
        elif mode == 'global':
            particles = ParticleSet.uniform(grid, params.kld.n_max, rng)
        else:
            raise ConfigurationError('Unknown MCL initialization %r' % (mode,))

        return Localizer(
            grid, sensor, params, rng, particles, odometry or start,
            config.get('mcl', 'update_min_d'), config.get('mcl', 'update_min_a'),
        )

    def estimate(self, odometry = None):
        if odometry is None:
            return self._pose
        return self._pose.compose(self._last_odometry.relative(odometry))

    def moved_enough(self, odometry):
        delta = self._last_odometry.relative(odometry)
        return math.hypot(delta.x, delta.y) >= self.update_min_d or abs(delta.theta) >= self.update_min_a

    # Runs the filter if the odometry has moved far enough (or force is set).
    # Returns True when it did.
    def update(self, odometry, scan, force = False):
        if not force and not self.moved_enough(odometry):
            return False

        delta = odometry_delta(self._last_odometry, odometry)
        moved = sample_motion_model_odometry_many(self.particles.poses, delta, self.params.motion, self.rng)
        weights, w_avg = weigh(moved, scan, self.sensor)
        w_slow, w_fast = update_averages(self.particles, w_avg, self.params.augmented)
        weighted = ParticleSet(moved, weights, w_slow, w_fast)

        self._pose, self.covariance = estimate_pose(weighted)
        self.particles = resample(weighted, self.grid, self.params.kld, self.rng)
        self._last_odometry = odometry
        self.updates += 1
        return True

