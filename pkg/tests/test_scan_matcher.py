import math

import numpy as np
import pytest

from PyNav.Errors import DegenerateScanError, InputDomainError
from PyNav.Geometry import Pose2D
from PyNav.Lidar import LaserScan, LidarConfig, cast_scan
from PyNav.ScanMatcher import ScanMatcher, scan_match


def test_identical_scans(room, lidar):
    scan = cast_scan(room, Pose2D(2.0, 2.0, 0.0), lidar)
    result = scan_match(scan, scan)
    assert abs(result.delta.x) < 1e-9
    assert abs(result.delta.y) < 1e-9
    assert abs(result.delta.theta) < 1e-9
    assert result.fitness == 1.0
    assert result.ok


def test_recovers_forward_motion(room, lidar):
    prev = cast_scan(room, Pose2D(2.0, 2.0, 0.0), lidar)
    curr = cast_scan(room, Pose2D(2.1, 2.0, 0.0), lidar)
    delta = scan_match(prev, curr).delta
    assert delta.x == pytest.approx(0.10, abs = 0.01)
    assert delta.y == pytest.approx(0.0, abs = 0.01)
    assert delta.theta == pytest.approx(0.0, abs = 0.005)


def test_recovers_turning_motion(room, lidar):
    a, b = Pose2D(6.0, 2.5, 0.3), Pose2D(6.05, 2.53, 0.36)
    result = scan_match(cast_scan(room, a, lidar), cast_scan(room, b, lidar))
    truth = a.relative(b)
    assert result.delta.x == pytest.approx(truth.x, abs = 0.01)
    assert result.delta.y == pytest.approx(truth.y, abs = 0.01)
    assert result.delta.theta == pytest.approx(truth.theta, abs = 0.005)
    assert np.allclose(result.covariance, result.covariance.T)


def test_forward_and_backward_compose_to_identity(room, lidar):
    a = cast_scan(room, Pose2D(2.0, 6.0, -0.2), lidar)
    b = cast_scan(room, Pose2D(2.08, 5.97, -0.15), lidar)
    loop = scan_match(a, b).delta.compose(scan_match(b, a).delta)
    assert math.hypot(loop.x, loop.y) < 1e-3
    assert abs(loop.theta) < 1e-3


def test_degenerate_scans(lidar):
    empty = LaserScan(0.0, np.full(lidar.beam_count, lidar.z_max), lidar)
    with pytest.raises(DegenerateScanError):
        scan_match(empty, empty)


def test_scans_need_one_config(room, lidar):
    other = LidarConfig(180, 2 * math.pi, 8.0)
    with pytest.raises(InputDomainError):
        ScanMatcher().match(cast_scan(room, Pose2D(2, 2, 0), lidar), cast_scan(room, Pose2D(2, 2, 0), other))
