import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from PyNav.Errors import ConfigurationError, EmbeddedPoseError, InputDomainError
from PyNav.Geometry import Pose2D
from PyNav.Lidar import BeamNoiseParams, LaserScan, LidarConfig, beam_density, cast_scan, corrupt_scan
from PyNav.World import WorldModel


def test_config_invariants():
    with pytest.raises(ConfigurationError):
        LidarConfig(beam_count = 1)
    with pytest.raises(ConfigurationError):
        LidarConfig(fov = 0.0)
    with pytest.raises(ConfigurationError):
        LidarConfig(z_max = -1.0)


def test_beam_angles():
    full = LidarConfig(4, 2 * math.pi, 8.0)
    assert np.allclose(full.angles(), [-math.pi, -math.pi / 2, 0.0, math.pi / 2])
    fan = LidarConfig(3, math.pi, 8.0)
    assert np.allclose(fan.angles(), [-math.pi / 2, 0.0, math.pi / 2])


def test_noise_weights_must_sum_to_one():
    with pytest.raises(ConfigurationError):
        BeamNoiseParams(0.5, 0.1, 0.1, 0.1)
    with pytest.raises(ConfigurationError):
        BeamNoiseParams(1.1, -0.1, 0.0, 0.0)


def test_empty_world_returns_max_range(lidar):
    world = WorldModel((-100, -100, 100, 100))
    scan = cast_scan(world, Pose2D(0, 0, 0.3), lidar)
    assert (scan.ranges == lidar.z_max).all()
    assert not scan.valid().any()
    assert len(scan.endpoints()) == 0


def test_wall_ranges():
    world = WorldModel((-5, -5, 2, 5))
    cfg = LidarConfig(8, 2 * math.pi, 8.0)
    scan = cast_scan(world, Pose2D(), cfg)
    angles = cfg.angles()
    assert scan.ranges[np.argmin(np.abs(angles))] == pytest.approx(2.0)
    assert scan.ranges[np.argmin(np.abs(angles - math.pi / 4))] == pytest.approx(2 * math.sqrt(2))


def test_embedded_pose(room, lidar):
    with pytest.raises(EmbeddedPoseError):
        cast_scan(room, Pose2D(4.0, 4.5, 0.0), lidar)
    with pytest.raises(EmbeddedPoseError):
        cast_scan(room, Pose2D(-1.0, 4.5, 0.0), lidar)


def test_mirror_symmetry(room):
    # A symmetric fan, so mirroring reverses the beam order.
    cfg = LidarConfig(181, math.pi, 8.0)
    pose = Pose2D(2.0, 3.0, 0.4)
    scan = cast_scan(room, pose, cfg)
    mirrored = cast_scan(room.mirrored(), Pose2D(pose.x, -pose.y, -pose.theta), cfg)
    assert np.allclose(scan.ranges, mirrored.ranges[::-1], atol = 1e-9)


def test_exact_mixture_passes_through(room, lidar, rng):
    ideal = cast_scan(room, Pose2D(2.0, 2.0, 0.0), lidar)
    out = corrupt_scan(ideal, BeamNoiseParams(1.0, 0.0, 0.0, 0.0, 0.0, 1.0), rng)
    assert np.array_equal(out.ranges, ideal.ranges)


def test_failure_only_mixture(room, lidar, rng):
    ideal = cast_scan(room, Pose2D(2.0, 2.0, 0.0), lidar)
    out = corrupt_scan(ideal, BeamNoiseParams(0.0, 0.0, 1.0, 0.0), rng)
    assert (out.ranges == lidar.z_max).all()


def test_hit_noise_statistics(rng):
    cfg = LidarConfig(10000, 2 * math.pi, 8.0)
    ideal = LaserScan(0.0, np.full(10000, 2.0), cfg)
    out = corrupt_scan(ideal, BeamNoiseParams(1.0, 0.0, 0.0, 0.0, 0.01, 1.0), rng)
    assert abs(out.ranges.mean() - 2.0) < 3 * 0.01 / math.sqrt(10000)


def test_output_stays_in_range(rng):
    cfg = LidarConfig(100000, 2 * math.pi, 8.0)
    ideal = LaserScan(0.0, rng.uniform(0.0, 8.0, 100000), cfg)
    out = corrupt_scan(ideal, BeamNoiseParams(0.7, 0.1, 0.1, 0.1, 0.5, 0.5), rng)
    assert out.ranges.min() >= 0.0
    assert out.ranges.max() <= 8.0


def test_corrupt_is_reproducible(room, lidar):
    ideal = cast_scan(room, Pose2D(2.0, 2.0, 0.0), lidar)
    noise = BeamNoiseParams()
    a = corrupt_scan(ideal, noise, np.random.default_rng(3))
    b = corrupt_scan(ideal, noise, np.random.default_rng(3))
    assert np.array_equal(a.ranges, b.ranges)


def test_rejects_out_of_range_ideal(rng):
    cfg = LidarConfig(4, 2 * math.pi, 8.0)
    with pytest.raises(InputDomainError):
        corrupt_scan(LaserScan(0.0, np.array([1.0, 2.0, 9.0, 1.0]), cfg), BeamNoiseParams(), rng)


# Continuous part integrates to 1 - z_max_w; the point mass at z_max adds the rest.
def test_beam_density_normalizes(rng):
    z_max = 8.0
    z = np.linspace(0.0, z_max, 400001)[:-1]
    for _ in range(50):
        weights = rng.dirichlet(np.ones(4))
        noise = BeamNoiseParams(*weights, rng.uniform(0.01, 0.5), rng.uniform(0.1, 2.0))
        expected = rng.uniform(0.5, 7.5)
        density = beam_density(z, expected, noise, z_max)
        total = trapezoid(density, z) + noise.z_max_w
        assert total == pytest.approx(1.0, abs = 1e-3)
