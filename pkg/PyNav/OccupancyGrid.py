'''
Log-odds occupancy grid.

Cells are stored row-major (row = y index, column = x index) as log-odds,
clamped to [-4, 4]. A value of exactly 0 means the cell was never observed.
The grid origin is the world pose of the outer corner of cell (0, 0).

Exported tri-state: occupied when p > 0.65, free when p < 0.25, otherwise
unknown.
'''

import math

import numpy as np

from PyNav.Errors import InputDomainError, OutOfBoundsError
from PyNav.Geometry import Pose2D

L_OCC = 0.85
L_FREE = 0.4
L_MIN = -4.0
L_MAX = 4.0

P_OCCUPIED = 0.65
P_FREE = 0.25


# Size, resolution and placement shared by every grid in the pipeline
# (occupancy, cost, distance). The origin is the world pose of the outer
# corner of cell (0, 0); cells are indexed (row, col) = (y, x).
class GridFrame:
    def __init__(self, width, height, resolution, origin = None):
        if not resolution > 0:
            raise InputDomainError('Grid resolution must be positive')
        if width < 1 or height < 1:
            raise InputDomainError('Grid must have at least one cell')

        self.width = int(width)
        self.height = int(height)
        self.resolution = float(resolution)
        self.origin = origin or Pose2D()

    def shape(self):
        return (self.height, self.width)

    # Origin after reflecting the world through the x axis (y -> -y). Rows
    # of the reflected grid run in reverse order.
    def mirrored_origin(self):
        return Pose2D(self.origin.x, -(self.origin.y + self.height * self.resolution), 0.0)

    #------------------------------------------------------------------------------
    # COORDINATES
    #------------------------------------------------------------------------------

    # World points (N x 2) to continuous grid coordinates, in cells, where
    # (0, 0) is the outer corner of cell (0, 0).
    def to_grid(self, points):
        points = np.atleast_2d(np.asarray(points, dtype = float))
        c, s = math.cos(self.origin.theta), math.sin(self.origin.theta)
        dx = points[:, 0] - self.origin.x
        dy = points[:, 1] - self.origin.y
        return np.column_stack((c * dx + s * dy, -s * dx + c * dy)) / self.resolution

    def to_world(self, grid_points):
        grid_points = np.atleast_2d(np.asarray(grid_points, dtype = float)) * self.resolution
        c, s = math.cos(self.origin.theta), math.sin(self.origin.theta)
        return np.column_stack((
            self.origin.x + c * grid_points[:, 0] - s * grid_points[:, 1],
            self.origin.y + s * grid_points[:, 0] + c * grid_points[:, 1],
        ))

    # (row, col) of the cell containing each point; the lower-left cell owns
    # its edges.
    def cell_of(self, points):
        grid = np.floor(self.to_grid(points)).astype(int)
        return grid[:, 1], grid[:, 0]

    def contains(self, rows, cols):
        return (rows >= 0) & (rows < self.height) & (cols >= 0) & (cols < self.width)

    # World centers of all cells as two (height, width) arrays.
    def cell_centers(self):
        cols, rows = np.meshgrid(np.arange(self.width) + 0.5, np.arange(self.height) + 0.5)
        world = self.to_world(np.column_stack((cols.ravel(), rows.ravel())))
        return world[:, 0].reshape(self.height, self.width), world[:, 1].reshape(self.height, self.width)

    # World center of the given cells, as an (N, 2) array.
    def center_of(self, rows, cols):
        rows = np.atleast_1d(rows)
        cols = np.atleast_1d(cols)
        return self.to_world(np.column_stack((cols + 0.5, rows + 0.5)))


class OccupancyGrid(GridFrame):
    def __init__(self, width, height, resolution, origin = None, cells = None):
        super().__init__(width, height, resolution, origin)
        if cells is None:
            self.cells = np.zeros((self.height, self.width))
        else:
            self.cells = np.clip(np.array(cells, dtype = float).reshape(self.height, self.width), L_MIN, L_MAX)

    # A grid covering the rectangle bounds plus margin on every side. Cell
    # centers fall on multiples of the resolution measured from the bounds
    # corner, so walls on round coordinates land in the middle of a cell.
    @staticmethod
    def covering(bounds, resolution, margin):
        xmin, ymin, xmax, ymax = bounds
        width = int(math.ceil((xmax - xmin + 2 * margin) / resolution)) + 1
        height = int(math.ceil((ymax - ymin + 2 * margin) / resolution)) + 1
        origin = Pose2D(xmin - margin - 0.5 * resolution, ymin - margin - 0.5 * resolution, 0.0)
        return OccupancyGrid(width, height, resolution, origin)

    def copy(self):
        return OccupancyGrid(self.width, self.height, self.resolution, self.origin, self.cells.copy())

    #------------------------------------------------------------------------------
    # OCCUPANCY
    #------------------------------------------------------------------------------

    def probabilities(self):
        return 1.0 / (1.0 + np.exp(-self.cells))

    def occupied_mask(self):
        return self.probabilities() > P_OCCUPIED

    def free_mask(self):
        return self.probabilities() < P_FREE

    def unknown_mask(self):
        return ~(self.occupied_mask() | self.free_mask())

    def observed_mask(self):
        return self.cells != 0.0

    # A grid of half the resolution. Each coarse cell takes the most occupied
    # of its (up to four) children, so thin walls survive.
    def downsampled(self):
        height = (self.height + 1) // 2
        width = (self.width + 1) // 2
        padded = np.full((2 * height, 2 * width), L_MIN)
        padded[:self.height, :self.width] = self.cells
        unseen = np.zeros((2 * height, 2 * width), dtype = bool)
        unseen[:self.height, :self.width] = self.cells == 0.0

        blocks = padded.reshape(height, 2, width, 2)
        coarse = blocks.max(axis = (1, 3))
        all_unseen = unseen.reshape(height, 2, width, 2).all(axis = (1, 3))
        coarse[all_unseen] = 0.0
        return OccupancyGrid(width, height, 2.0 * self.resolution, self.origin, coarse)

    #------------------------------------------------------------------------------
    # UPDATE
    #------------------------------------------------------------------------------

    # Log-odds update from one sweep taken at pose. Every cell a beam crosses
    # loses L_FREE and the cell holding a returned endpoint gains L_OCC. The
    # sensor's own cell and the endpoint cell get no free update. Beams with
    # no return, or whose endpoint leaves the grid, only clear.
    def integrate_scan(self, pose, scan):
        start_row, start_col = self.cell_of([[pose.x, pose.y]])
        if not self.contains(start_row, start_col)[0]:
            raise OutOfBoundsError('Pose (%.3f, %.3f) is outside the grid' % (pose.x, pose.y))

        angles = pose.theta + scan.angles()
        ends = np.column_stack((
            pose.x + scan.ranges * np.cos(angles),
            pose.y + scan.ranges * np.sin(angles),
        ))
        rows, cols, valid = self.traverse(np.array([pose.x, pose.y]), ends)

        end_rows, end_cols = self.cell_of(ends)
        end_inside = self.contains(end_rows, end_cols)
        returned = (scan.ranges < scan.config.z_max) & end_inside

        crossed = valid & self.contains(rows, cols)
        crossed &= ~((rows == start_row[0]) & (cols == start_col[0]))
        crossed &= ~(returned[:, None] & (rows == end_rows[:, None]) & (cols == end_cols[:, None]))

        # Per sweep a cell counts at most once as free and once as hit.
        free = np.zeros(self.cells.shape, dtype = bool)
        free[rows[crossed], cols[crossed]] = True
        hits = np.zeros(self.cells.shape, dtype = bool)
        hits[end_rows[returned], end_cols[returned]] = True

        update = np.where(free, -L_FREE, 0.0) + np.where(hits, L_OCC, 0.0)
        self.cells = np.clip(self.cells + update, L_MIN, L_MAX)
        return self

    # Cells crossed by the segments from start to each of ends (world
    # coordinates), as (rows, cols, valid) arrays of shape (len(ends), K).
    # The parameter values where a segment crosses a vertical or horizontal
    # cell boundary split it into pieces; the midpoint of each piece names
    # the cell it runs through.
    def traverse(self, start, ends):
        s = self.to_grid(start[None, :])[0]
        e = self.to_grid(ends)
        d = e - s[None, :]

        span = np.abs(d).max() if len(d) else 0.0
        k = np.arange(1, int(math.ceil(span)) + 2)

        crossings = []
        for axis in (0, 1):
            forward = math.floor(s[axis]) + k
            backward = math.ceil(s[axis]) - k
            boundary = np.where(d[:, axis:axis + 1] > 0, forward[None, :], backward[None, :])
            with np.errstate(divide = 'ignore', invalid = 'ignore'):
                t = (boundary - s[axis]) / d[:, axis:axis + 1]
            t[~np.isfinite(t) | (t < 0)] = 1.0
            crossings.append(np.minimum(t, 1.0))

        count = len(d)
        t = np.sort(np.hstack((np.zeros((count, 1)), crossings[0], crossings[1], np.ones((count, 1)))), axis = 1)
        middle = 0.5 * (t[:, :-1] + t[:, 1:])
        valid = (t[:, 1:] - t[:, :-1]) > 1e-12

        xs = s[0] + middle * d[:, 0:1]
        ys = s[1] + middle * d[:, 1:2]
        return np.floor(ys).astype(int), np.floor(xs).astype(int), valid

    #------------------------------------------------------------------------------
    # INTERPOLATION
    #------------------------------------------------------------------------------

    # Bilinear occupancy probability at world points and its gradient per
    # meter. Samples sit on cell centers, so points need half a cell of
    # margin from the grid edge.
    def interpolate(self, points, strict = True):
        points = np.atleast_2d(np.asarray(points, dtype = float))
        grid = self.to_grid(points) - 0.5
        gx, gy = grid[:, 0], grid[:, 1]

        inside = (gx >= 0) & (gx <= self.width - 1) & (gy >= 0) & (gy <= self.height - 1)
        if strict and not inside.all():
            raise OutOfBoundsError('Point outside the interpolation interior')

        x0 = np.clip(np.floor(gx).astype(int), 0, max(self.width - 2, 0))
        y0 = np.clip(np.floor(gy).astype(int), 0, max(self.height - 2, 0))
        x1 = np.minimum(x0 + 1, self.width - 1)
        y1 = np.minimum(y0 + 1, self.height - 1)
        fx = np.clip(gx - x0, 0.0, 1.0)
        fy = np.clip(gy - y0, 0.0, 1.0)

        p = self.probabilities()
        p00, p10 = p[y0, x0], p[y0, x1]
        p01, p11 = p[y1, x0], p[y1, x1]

        value = (1 - fy) * ((1 - fx) * p00 + fx * p10) + fy * ((1 - fx) * p01 + fx * p11)
        dgx = (1 - fy) * (p10 - p00) + fy * (p11 - p01)
        dgy = (1 - fx) * (p01 - p00) + fx * (p11 - p10)

        c, s = math.cos(self.origin.theta), math.sin(self.origin.theta)
        gradient = np.column_stack((c * dgx - s * dgy, s * dgx + c * dgy)) / self.resolution

        if not strict:
            value = np.where(inside, value, 0.0)
            gradient[~inside] = 0.0
            return value, gradient, inside
        return value, gradient

    #------------------------------------------------------------------------------
    # RAYCASTING
    #------------------------------------------------------------------------------

    # Expected range along each ray to the first occupied cell, capped at
    # z_max. Rays are marched in quarter-cell steps; leaving the grid counts
    # as no return.
    def raycast(self, origins, angles, z_max, occupied = None, chunk = 20000):
        origins = np.atleast_2d(np.asarray(origins, dtype = float))
        angles = np.asarray(angles, dtype = float)
        if occupied is None:
            occupied = self.occupied_mask()

        step = 0.25 * self.resolution
        distances = np.arange(1, int(math.ceil(z_max / step)) + 1) * step
        distances = np.minimum(distances, z_max)
        out = np.full(len(angles), float(z_max))

        for begin in range(0, len(angles), chunk):
            end = min(begin + chunk, len(angles))
            ox, oy = origins[begin:end, 0:1], origins[begin:end, 1:2]
            xs = ox + np.cos(angles[begin:end])[:, None] * distances[None, :]
            ys = oy + np.sin(angles[begin:end])[:, None] * distances[None, :]
            rows, cols = self.cell_of(np.column_stack((xs.ravel(), ys.ravel())))
            inside = self.contains(rows, cols)
            blocked = np.zeros(len(rows), dtype = bool)
            blocked[inside] = occupied[rows[inside], cols[inside]]
            blocked = blocked.reshape(xs.shape)

            any_blocked = blocked.any(axis = 1)
            first = np.argmax(blocked, axis = 1)
            out[begin:end] = np.where(any_blocked, distances[first], z_max)

        return out

    def mirrored(self):
        return OccupancyGrid(self.width, self.height, self.resolution, self.mirrored_origin(), self.cells[::-1].copy())

