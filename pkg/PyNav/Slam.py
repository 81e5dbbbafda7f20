'''
Odometry-free mapping: every scan is aligned against the map built so far
and then written into it.

Alignment minimizes

    sum_i (1 - M(T(pose) * p_i))^2

over the pose, where p_i are the beam endpoints in the body frame and M is
the bilinearly interpolated occupancy probability of the map. The solve is
Gauss-Newton with step halving, first on a half-resolution copy of the map
and then on the map itself.
'''

import math
from dataclasses import dataclass

import numpy as np

from PyNav.Debug import DEBUG
from PyNav.Errors import InputDomainError, OutOfBoundsError
from PyNav.Geometry import Pose2D

MAX_ITERATIONS = 30
TOLERANCE = 1e-5
MAX_HALVINGS = 8
# Smallest eigenvalue of the normal matrix treated as singular.
SINGULAR = 1e-9


@dataclass(frozen = True, eq = False)
class MapMatchResult:
    pose: Pose2D
    iterations: int
    converged: bool
    hessian: np.ndarray


def integrate_scan(grid, pose, scan):
    return grid.integrate_scan(pose, scan)


def interpolate(grid, point):
    value, gradient = grid.interpolate(np.atleast_2d(point))
    return float(value[0]), gradient[0]


# Residuals 1 - M and their Jacobian with respect to (x, y, theta). Endpoints
# that fall outside the interpolation interior keep residual 1 and no slope.
def _linearize(grid, points, xi):
    c, s = math.cos(xi[2]), math.sin(xi[2])
    world = np.column_stack((
        xi[0] + c * points[:, 0] - s * points[:, 1],
        xi[1] + s * points[:, 0] + c * points[:, 1],
    ))
    value, gradient, _ = grid.interpolate(world, strict = False)

    dtheta = np.column_stack((
        -s * points[:, 0] - c * points[:, 1],
        c * points[:, 0] - s * points[:, 1],
    ))
    jacobian = -np.column_stack((gradient[:, 0], gradient[:, 1], (gradient * dtheta).sum(axis = 1)))
    return 1.0 - value, jacobian


def _objective(grid, points, xi):
    residuals, _ = _linearize(grid, points, xi)
    return float(residuals @ residuals)


# Gauss-Newton on one level. Returns (xi, iterations used, converged,
# hessian), or None for hessian when the normal matrix is singular.
def _solve(grid, points, xi, budget):
    hessian = np.zeros((3, 3))
    for iteration in range(1, budget + 1):
        residuals, jacobian = _linearize(grid, points, xi)
        hessian = jacobian.T @ jacobian
        if np.linalg.eigvalsh(hessian).min() < SINGULAR:
            return xi, iteration, False, None

        step = -np.linalg.solve(hessian, jacobian.T @ residuals)
        current = float(residuals @ residuals)
        small = np.linalg.norm(step) < TOLERANCE

        # Halve until the objective does not go up. If no halving does, xi
        # stays put and counts as converged only when the full step was
        # already below the tolerance.
        for _ in range(MAX_HALVINGS):
            if _objective(grid, points, xi + step) <= current:
                break
            step = 0.5 * step
        else:
            return xi, iteration, bool(small), hessian

        xi = xi + step
        if np.linalg.norm(step) < TOLERANCE:
            return xi, iteration, True, hessian

    return xi, budget, False, hessian


def match_scan_to_map(grid, scan, init, max_iterations = MAX_ITERATIONS):
    row, col = grid.cell_of([[init.x, init.y]])
    if not grid.contains(row, col)[0]:
        raise OutOfBoundsError('Initial pose (%.3f, %.3f) is outside the map' % (init.x, init.y))
    if max_iterations < 1:
        raise InputDomainError('max_iterations must be at least 1')

    points = scan.endpoints()
    if len(points) == 0:
        return MapMatchResult(init, 0, False, np.zeros((3, 3)))

    xi = init.as_array()
    used = 0

    # The coarse level gets at most half the budget.
    coarse_budget = max(max_iterations // 2, 1) if max_iterations > 1 else 0
    if coarse_budget:
        coarse_xi, iterations, _, hessian = _solve(grid.downsampled(), points, xi, coarse_budget)
        used += iterations
        if hessian is None:
            return MapMatchResult(init, used, False, np.zeros((3, 3)))
        xi = coarse_xi

    xi, iterations, converged, hessian = _solve(grid, points, xi, max_iterations - used)
    used += iterations
    if hessian is None:
        return MapMatchResult(init, used, False, np.zeros((3, 3)))

    return MapMatchResult(Pose2D.from_array(xi), used, converged, hessian)


# Incremental mapper. The first scan goes into the map at the initial pose;
# every later one is matched starting from the previous pose and then
# integrated. A match that jumps more than max_step is dropped.
class Mapper:
    def __init__(self, grid, initial_pose, max_iterations = MAX_ITERATIONS, max_step = 0.5):
        self.grid = grid
        self.pose = initial_pose
        self.max_iterations = max_iterations
        self.max_step = max_step
        self.trajectory = []
        self.skipped = 0

    def update(self, scan):
        if not self.trajectory:
            self.grid.integrate_scan(self.pose, scan)
            self.trajectory.append(self.pose)
            return self.pose

        result = match_scan_to_map(self.grid, scan, self.pose, self.max_iterations)
        step = self.pose.distance_to(result.pose)
        if step > self.max_step:
            self.skipped += 1
            DEBUG.write('SLAM skipped scan at t=%.3f: matcher jumped %.3f m' % (scan.timestamp, step))
        else:
            self.pose = result.pose
            self.grid.integrate_scan(self.pose, scan)

        self.trajectory.append(self.pose)
        return self.pose


# Runs the mapper over a whole scan stream. The trajectory has one pose per
# scan; a skipped scan repeats the previous pose.
def run_slam(scans, initial_pose, grid, max_iterations = MAX_ITERATIONS, max_step = 0.5):
    mapper = Mapper(grid, initial_pose, max_iterations, max_step)
    for scan in scans:
        mapper.update(scan)

    if not mapper.trajectory:
        raise InputDomainError('run_slam needs at least one scan')
    return mapper.grid, mapper.trajectory
