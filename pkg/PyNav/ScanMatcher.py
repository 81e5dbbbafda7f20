'''
Laser odometry by point-to-line ICP.

Each endpoint of the current scan is paired with the line through its two
nearest endpoints of the previous scan, and the rigid motion minimizing the
squared point-to-line distances is solved by Gauss-Newton. Work proceeds
coarse to fine over beam decimation factors 4, 2 and 1, so large motions are
caught by the sparse levels and refined by the dense one.

The returned delta is the pose of the current scan expressed in the frame of
the previous one.
'''

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from PyNav.Errors import DegenerateScanError, InputDomainError
from PyNav.Geometry import Pose2D
from PyNav.Debug import DEBUG


@dataclass(frozen = True, eq = False)
class ScanMatchResult:
    delta: Pose2D
    covariance: np.ndarray
    fitness: float
    converged: bool
    # False when fitness is below the acceptance threshold or the solver ran
    # out of iterations; the estimate is still the best one found.
    ok: bool


class ScanMatcher:
    SCHEDULE = (4, 2, 1)

    def __init__(
        self,
        max_iterations = 30,
        min_valid = 10,
        max_correspondence = None,
        inlier_distance = 0.05,
        min_fitness = 0.5,
        tolerance = 1e-6,
    ):
        self.max_iterations = max_iterations
        self.min_valid = min_valid
        self.max_correspondence = max_correspondence or {4: 1.0, 2: 0.5, 1: 0.25}
        self.inlier_distance = inlier_distance
        self.min_fitness = min_fitness
        self.tolerance = tolerance

    def match(self, prev, curr, initial_guess = None):
        if prev.config != curr.config:
            raise InputDomainError('Scans come from different LIDAR configurations')

        for scan, name in ((prev, 'previous'), (curr, 'current')):
            if int(scan.valid().sum()) < self.min_valid:
                raise DegenerateScanError('Too few returns in the %s scan' % name)

        xi = (initial_guess or Pose2D()).as_array()
        converged = True
        for factor in ScanMatcher.SCHEDULE:
            xi, level_converged = self._refine(prev, curr, xi, factor)
            converged = level_converged

        residuals, jacobian, used = self._linearize(prev, curr, xi, 1)
        total = int(curr.valid().sum())
        fitness = float((np.abs(residuals) < self.inlier_distance).sum()) / total if total else 0.0

        covariance = np.zeros((3, 3))
        if len(residuals) > 3:
            variance = float(residuals @ residuals) / (len(residuals) - 3)
            normal = jacobian.T @ jacobian
            if np.linalg.matrix_rank(normal) == 3:
                covariance = variance * np.linalg.inv(normal)
                covariance = 0.5 * (covariance + covariance.T)

        ok = converged and fitness >= self.min_fitness
        if not ok:
            DEBUG.write('Scan match flagged: fitness %.3f, converged %s' % (fitness, converged))

        return ScanMatchResult(Pose2D.from_array(xi), covariance, fitness, converged, ok)

    def _refine(self, prev, curr, xi, factor):
        for _ in range(self.max_iterations):
            residuals, jacobian, used = self._linearize(prev, curr, xi, factor)
            if used < 3:
                return xi, False

            step = np.linalg.lstsq(jacobian, -residuals, rcond = None)[0]
            xi = xi + step
            if np.abs(step).max() < self.tolerance:
                return xi, True

        return xi, False

    # Point-to-line residuals of curr's endpoints (moved by xi) against
    # lines through neighbouring beams of prev, with their Jacobian.
    def _linearize(self, prev, curr, xi, factor):
        reference, reference_beams = _points(prev, factor)
        moving, _ = _points(curr, factor)
        if len(reference) < 2 or len(moving) == 0:
            return np.zeros(0), np.zeros((0, 3)), 0

        c, s = math.cos(xi[2]), math.sin(xi[2])
        moved = np.column_stack((
            xi[0] + c * moving[:, 0] - s * moving[:, 1],
            xi[1] + s * moving[:, 0] + c * moving[:, 1],
        ))

        tree = cKDTree(reference)
        distance, first = tree.query(moved)

        # The second line point is whichever beam neighbour of the nearest
        # point lies closer; both must be neighbouring beams.
        before = np.maximum(first - 1, 0)
        after = np.minimum(first + 1, len(reference) - 1)
        before_distance = np.hypot(*(reference[before] - moved).T)
        after_distance = np.hypot(*(reference[after] - moved).T)
        before_distance[before == first] = np.inf
        after_distance[after == first] = np.inf
        second = np.where(before_distance < after_distance, before, after)
        adjacent = (second != first) & (np.abs(reference_beams[first] - reference_beams[second]) <= 2 * factor)
        keep = adjacent & (distance < self.max_correspondence.get(factor, 0.25))

        a, b = reference[first[keep]], reference[second[keep]]
        direction = b - a
        length = np.hypot(direction[:, 0], direction[:, 1])
        good = length > 1e-9
        a, direction, length = a[good], direction[good], length[good]
        normal = np.column_stack((-direction[:, 1], direction[:, 0])) / length[:, None]

        points = moved[keep][good]
        body = moving[keep][good]
        residuals = ((points - a) * normal).sum(axis = 1)

        dtheta = np.column_stack((-s * body[:, 0] - c * body[:, 1], c * body[:, 0] - s * body[:, 1]))
        jacobian = np.column_stack((normal[:, 0], normal[:, 1], (normal * dtheta).sum(axis = 1)))

        return residuals, jacobian, len(residuals)


# Valid endpoints of every factor-th beam, with their beam indices.
def _points(scan, factor):
    beams = np.arange(0, len(scan.ranges), factor)
    beams = beams[scan.ranges[beams] < scan.config.z_max]
    angles = scan.angles()[beams]
    ranges = scan.ranges[beams]
    return np.column_stack((ranges * np.cos(angles), ranges * np.sin(angles))), beams


def scan_match(prev, curr, initial_guess = None):
    return ScanMatcher().match(prev, curr, initial_guess)
