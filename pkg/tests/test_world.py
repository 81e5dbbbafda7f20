import math

import numpy as np
import pytest

from PyNav.Errors import ConfigurationError
from PyNav.World import WorldModel, polygon_area


def test_rejects_bad_obstacles():
    with pytest.raises(ConfigurationError):
        WorldModel((0, 0, 10, 10), [[(1, 1), (2, 1)]])
    with pytest.raises(ConfigurationError):
        WorldModel((0, 0, 10, 10), [[(1, 1), (2, 1), (3, 1)]])
    with pytest.raises(ConfigurationError):
        WorldModel((0, 0, 10, 10), [[(1, 1), (12, 1), (1, 2)]])
    with pytest.raises(ConfigurationError):
        WorldModel((0, 0, 10, 10), [[(0, 0), (4, 0), (1, 1), (0, 4)]])
    with pytest.raises(ConfigurationError):
        WorldModel((0, 0, 0, 10))


def test_clockwise_polygons_are_flipped():
    world = WorldModel((0, 0, 10, 10), [[(1, 1), (1, 2), (2, 2), (2, 1)]])
    assert polygon_area(world.obstacles[0]) == pytest.approx(1.0)


def test_containment_and_clearance(room):
    assert room.inside_obstacle(4.0, 4.5)
    assert room.inside_obstacle(3.5, 4.5)
    assert not room.inside_obstacle(2.0, 2.0)
    assert room.clearance(4.0, 4.5) == 0.0
    assert room.clearance(-1.0, 5.0) == 0.0
    assert room.clearance(2.0, 2.0) == pytest.approx(2.0)
    assert room.clearance(4.25, 3.5) == pytest.approx(0.5)


def test_raycast_hits_walls():
    world = WorldModel((-5, -5, 2, 5))
    ranges = world.raycast(0.0, 0.0, [0.0, math.pi / 4, math.pi], 8.0)
    assert ranges[0] == pytest.approx(2.0)
    assert ranges[1] == pytest.approx(2.0 * math.sqrt(2.0))
    assert ranges[2] == pytest.approx(5.0)


def test_raycast_caps_at_z_max(room):
    assert room.raycast(2.0, 2.0, [0.0], 1.0)[0] == 1.0


def test_rasterize_edges_marks_walls():
    world = WorldModel((0, 0, 1, 1))
    mask = world.rasterize_edges(12, 12, 0.1, -0.1, -0.1)
    assert mask[1, 5] and mask[5, 1]
    assert not mask[5, 5]


def test_mirror_flips_obstacles(room):
    mirrored = room.mirrored()
    assert mirrored.bounds == (0.0, -10.0, 10.0, 0.0)
    assert mirrored.inside_obstacle(4.0, -4.5)
    assert all(polygon_area(p) > 0 for p in mirrored.obstacles)
    assert np.isclose(mirrored.clearance(2.0, -2.0), room.clearance(2.0, 2.0))
