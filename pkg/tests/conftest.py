import math

import numpy as np
import pytest

from PyNav.Geometry import Pose2D
from PyNav.Lidar import LidarConfig, cast_scan
from PyNav.OccupancyGrid import OccupancyGrid
from PyNav.World import WorldModel

# The reference room of scenarios/reference_room.ini.
ROOM_BOUNDS = (0.0, 0.0, 10.0, 10.0)
ROOM_OBSTACLES = [
    [(3.5, 4.0), (5.0, 4.0), (5.0, 5.0), (3.5, 5.0)],
    [(2.5, 5.5), (3.5, 5.5), (2.5, 6.5)],
    [(8.0, 8.0), (9.0, 8.0), (9.0, 9.5), (8.0, 9.5)],
    [(8.0, 1.0), (9.5, 1.0), (9.5, 1.8), (8.0, 1.8)],
]
# Free poses the room map is surveyed from.
SURVEY = [
    Pose2D(2.0, 2.0, 0.0),
    Pose2D(6.0, 2.0, 0.5),
    Pose2D(7.0, 5.0, 1.57),
    Pose2D(5.0, 7.5, 3.14),
    Pose2D(1.5, 7.0, -1.57),
    Pose2D(2.0, 4.0, 0.0),
    Pose2D(6.5, 8.5, 0.0),
    Pose2D(8.5, 4.0, 2.5),
]


def room_world():
    return WorldModel(ROOM_BOUNDS, ROOM_OBSTACLES)


def full_lidar():
    return LidarConfig(360, 2.0 * math.pi, 8.0, 0.0)


# Occupancy grid built from noise-free scans taken at poses.
def survey_grid(world, lidar, poses, resolution = 0.05, margin = 1.0):
    grid = OccupancyGrid.covering(world.bounds, resolution, margin)
    for pose in poses:
        grid.integrate_scan(pose, cast_scan(world, pose, lidar))
    return grid


@pytest.fixture
def room():
    return room_world()


@pytest.fixture
def lidar():
    return full_lidar()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# Shared between tests; copy before changing it.
@pytest.fixture(scope = 'session')
def room_grid():
    return survey_grid(room_world(), full_lidar(), SURVEY)
