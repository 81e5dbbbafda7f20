'''
Likelihood field model. Beam endpoints are projected into the map and scored
by their distance to the nearest obstacle, looked up in a precomputed
distance field:

    p = z_hit * N(d; 0, sigma) + z_rand / z_max

Beams without a return are skipped. Endpoints off the field get the largest
distance in it.
'''

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from PyNav.Costmap import DistanceField
from PyNav.Errors import ConfigurationError
from PyNav.SensorModels.SensorModel import SensorModel


@dataclass(frozen = True, eq = False)
class LikelihoodFieldParams:
    sigma: float
    z_rand_mix: float
    distance_field: DistanceField

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigurationError('Likelihood field sigma must be positive')
        if not 0 <= self.z_rand_mix <= 1:
            raise ConfigurationError('z_rand_mix must lie in [0, 1]')
        if (self.distance_field.distances < 0).any():
            raise ConfigurationError('Distance field must be non-negative')

    # Mixture weights (z_hit, z_rand, z_max_w) when none are given.
    def default_weights(self):
        return (1.0 - self.z_rand_mix, self.z_rand_mix, 0.0)


class LikelihoodField(SensorModel):
    def __init__(self, grid, params, weights = None, stride = 1):
        super().__init__(grid, stride)
        self.params = params
        self.weights = weights or params.default_weights()

    @classmethod
    def from_config(cls, grid, config):
        z_hit = config.get('mcl', 'z_hit')
        z_rand = config.get('mcl', 'z_rand')
        params = LikelihoodFieldParams(config.get('mcl', 'sigma'), z_rand, DistanceField.from_grid(grid))
        return cls(grid, params, (z_hit, z_rand, config.get('mcl', 'z_max_w')), config.get('mcl', 'beam_stride'))

    def beams(self, scan):
        beams = super().beams(scan)
        return beams[scan.ranges[beams] < scan.config.z_max]

    def _beam_densities(self, poses, scan):
        beams = self.beams(scan)
        if len(beams) == 0:
            return np.zeros((len(poses), 0))

        angles = scan.angles()[beams]
        ranges = scan.ranges[beams]
        bx = ranges * np.cos(angles)
        by = ranges * np.sin(angles)

        c = np.cos(poses[:, 2:3])
        s = np.sin(poses[:, 2:3])
        wx = poses[:, 0:1] + c * bx[None, :] - s * by[None, :]
        wy = poses[:, 1:2] + s * bx[None, :] + c * by[None, :]

        distance = self.params.distance_field.lookup(np.column_stack((wx.ravel(), wy.ravel())))
        distance = distance.reshape(wx.shape)

        z_hit, z_rand, _ = self.weights
        return z_hit * norm.pdf(distance, scale = self.params.sigma) + z_rand / scan.config.z_max


def likelihood_field_range_finder(scan, pose, params, weights = None, stride = 1):
    grid = params.distance_field
    return LikelihoodField(grid, params, weights, stride).log_likelihood(scan, pose)


CLASS = LikelihoodField
