'''
Beam range finder model. For every scored beam the map is raycast from the
particle to get the range it should have measured, and the measurement is
scored with the same four-part mixture the simulated LIDAR draws from.
'''

import numpy as np

from PyNav.Lidar import BeamNoiseParams, beam_density
from PyNav.SensorModels.SensorModel import SensorModel


class BeamModel(SensorModel):
    def __init__(self, grid, noise, stride = 1):
        super().__init__(grid, stride)
        noise.validate()
        self.noise = noise
        self._occupied = grid.occupied_mask()

    @classmethod
    def from_config(cls, grid, config):
        noise = BeamNoiseParams(
            config.get('lidar', 'z_hit'),
            config.get('lidar', 'z_short'),
            config.get('lidar', 'z_max_w'),
            config.get('lidar', 'z_rand'),
            config.get('lidar', 'sigma_hit'),
            config.get('lidar', 'lambda_short'),
        )
        return cls(grid, noise, config.get('mcl', 'beam_stride'))

    def expected_ranges(self, poses, scan):
        beams = self.beams(scan)
        angles = scan.angles()[beams]
        count = len(poses)

        origins = np.repeat(poses[:, 0:2], len(beams), axis = 0)
        headings = (poses[:, 2:3] + angles[None, :]).ravel()
        expected = self.grid.raycast(origins, headings, scan.config.z_max, self._occupied)
        return expected.reshape(count, len(beams))

    def _beam_densities(self, poses, scan):
        beams = self.beams(scan)
        expected = self.expected_ranges(poses, scan)
        measured = np.broadcast_to(scan.ranges[beams], expected.shape)
        return beam_density(measured, expected, self.noise, scan.config.z_max)


def beam_range_finder_model(scan, pose, grid, params, stride = 1):
    return BeamModel(grid, params, stride).log_likelihood(scan, pose)


CLASS = BeamModel
