'''
SensorModel cannot be used as a sensor model by itself. It holds what the
beam model and the likelihood field have in common: the map they score
against, which beams they look at, and the bookkeeping that turns per-beam
densities into one log-likelihood per particle.

To write your own model, subclass it, overload _beam_densities, and export
it from a module in this package as CLASS. Scenarios pick it by module name
(mcl.sensor_model).
'''

import numpy as np

from PyNav.Errors import InputDomainError

# Per-beam densities are floored here before taking the log.
DENSITY_FLOOR = 1e-300


class SensorModel:
    def __init__(self, grid, stride = 1):
        if stride < 1:
            raise InputDomainError('Beam stride must be at least 1')
        self.grid = grid
        self.stride = int(stride)

    # Builds a model from the scenario's [mcl] and [lidar] sections.
    @classmethod
    def from_config(cls, grid, config):
        raise NotImplementedError

    # Indices of the beams this model scores for a scan.
    def beams(self, scan):
        beams = np.arange(0, len(scan.ranges), self.stride)
        if (scan.ranges[beams] > scan.config.z_max).any() or (scan.ranges[beams] < 0).any():
            raise InputDomainError('Measured range outside [0, z_max]')
        return beams

    # How many beams contribute to a log-likelihood for this scan.
    def used_beams(self, scan):
        return len(self.beams(scan))

    # One log-likelihood per row of poses (an (N, 3) array).
    def log_likelihoods(self, poses, scan):
        poses = np.atleast_2d(np.asarray(poses, dtype = float))
        densities = self._beam_densities(poses, scan)
        if densities.shape[1] == 0:
            return np.zeros(len(poses))
        return np.log(np.maximum(densities, DENSITY_FLOOR)).sum(axis = 1)

    def log_likelihood(self, scan, pose):
        return float(self.log_likelihoods(pose.as_array()[None, :], scan)[0])

    # (N, used beams) array of per-beam densities.
    def _beam_densities(self, poses, scan):
        raise NotImplementedError
