'''
The ground-truth world: an axis-aligned rectangle with convex polygon
obstacles. It answers the simulator's geometric questions (ray lengths,
clearance, containment) exactly, and can rasterize itself for map quality
checks.
'''

import math

import numpy as np

from PyNav.Errors import ConfigurationError


class WorldModel:
    # bounds is (xmin, ymin, xmax, ymax); obstacles is a list of vertex lists.
    # Clockwise polygons are flipped to counter-clockwise.
    def __init__(self, bounds, obstacles = ()):
        xmin, ymin, xmax, ymax = [float(value) for value in bounds]
        if not xmax > xmin or not ymax > ymin:
            raise ConfigurationError('Empty world bounds %r' % (bounds,))

        self.bounds = (xmin, ymin, xmax, ymax)
        self.obstacles = []
        for polygon in obstacles:
            self.obstacles.append(self._check_polygon(np.asarray(polygon, dtype = float)))

        self._segments = self._build_segments()

    def _check_polygon(self, polygon):
        if polygon.ndim != 2 or polygon.shape[0] < 3 or polygon.shape[1] != 2:
            raise ConfigurationError('Obstacle needs at least 3 (x, y) vertices')

        xmin, ymin, xmax, ymax = self.bounds
        if (polygon[:, 0] < xmin).any() or (polygon[:, 0] > xmax).any() or \
                (polygon[:, 1] < ymin).any() or (polygon[:, 1] > ymax).any():
            raise ConfigurationError('Obstacle vertex outside world bounds')

        area = polygon_area(polygon)
        if abs(area) < 1e-12:
            raise ConfigurationError('Obstacle with zero area')
        if area < 0:
            polygon = polygon[::-1].copy()

        edges = np.roll(polygon, -1, axis = 0) - polygon
        turns = edges[:, 0] * np.roll(edges, -1, axis = 0)[:, 1] - edges[:, 1] * np.roll(edges, -1, axis = 0)[:, 0]
        if (turns < -1e-12).any():
            raise ConfigurationError('Obstacle is not convex')

        return polygon

    # Every boundary edge as rows of (x0, y0, x1, y1): obstacle edges first,
    # then the four walls of the bounds.
    def _build_segments(self):
        rows = []
        for polygon in self.obstacles:
            following = np.roll(polygon, -1, axis = 0)
            rows.append(np.hstack((polygon, following)))

        xmin, ymin, xmax, ymax = self.bounds
        rows.append(np.array([
            [xmin, ymin, xmax, ymin],
            [xmax, ymin, xmax, ymax],
            [xmax, ymax, xmin, ymax],
            [xmin, ymax, xmin, ymin],
        ]))
        return np.vstack(rows)

    def segments(self):
        return self._segments

    def in_bounds(self, x, y):
        xmin, ymin, xmax, ymax = self.bounds
        return xmin < x < xmax and ymin < y < ymax

    # Boundary points count as inside.
    def inside_obstacle(self, x, y):
        for polygon in self.obstacles:
            following = np.roll(polygon, -1, axis = 0)
            cross = (following[:, 0] - polygon[:, 0]) * (y - polygon[:, 1]) - \
                (following[:, 1] - polygon[:, 1]) * (x - polygon[:, 0])
            if (cross >= 0).all():
                return True
        return False

    # Distance from a point to the nearest wall or obstacle edge; 0 when the
    # point is not in free space.
    def clearance(self, x, y):
        if not self.in_bounds(x, y) or self.inside_obstacle(x, y):
            return 0.0

        seg = self._segments
        start = seg[:, 0:2]
        edge = seg[:, 2:4] - start
        length2 = (edge ** 2).sum(axis = 1)
        t = np.clip(((x - start[:, 0]) * edge[:, 0] + (y - start[:, 1]) * edge[:, 1]) / length2, 0.0, 1.0)
        nearest = start + edge * t[:, None]
        return float(np.hypot(nearest[:, 0] - x, nearest[:, 1] - y).min())

    # Length along each ray to the first edge it meets, capped at z_max.
    def raycast(self, x, y, angles, z_max):
        angles = np.asarray(angles, dtype = float)
        dx, dy = np.cos(angles)[:, None], np.sin(angles)[:, None]

        seg = self._segments
        px, py = seg[None, :, 0] - x, seg[None, :, 1] - y
        ex, ey = (seg[:, 2] - seg[:, 0])[None, :], (seg[:, 3] - seg[:, 1])[None, :]

        denom = dx * ey - dy * ex
        with np.errstate(divide = 'ignore', invalid = 'ignore'):
            t = (px * ey - py * ex) / denom
            u = (px * dy - py * dx) / denom

        hit = (np.abs(denom) > 1e-12) & (t >= 0.0) & (u >= -1e-12) & (u <= 1.0 + 1e-12)
        t = np.where(hit, t, np.inf)
        return np.minimum(t.min(axis = 1), z_max)

    # Boolean (height, width) mask of grid cells crossed by any obstacle or
    # wall edge. Ground truth for map quality.
    def rasterize_edges(self, width, height, resolution, origin_x, origin_y):
        mask = np.zeros((height, width), dtype = bool)
        step = resolution / 4.0
        for x0, y0, x1, y1 in self._segments:
            count = max(2, int(math.ceil(math.hypot(x1 - x0, y1 - y0) / step)) + 1)
            xs = np.linspace(x0, x1, count)
            ys = np.linspace(y0, y1, count)
            cols = np.floor((xs - origin_x) / resolution).astype(int)
            rows = np.floor((ys - origin_y) / resolution).astype(int)
            keep = (cols >= 0) & (cols < width) & (rows >= 0) & (rows < height)
            mask[rows[keep], cols[keep]] = True
        return mask

    # The world reflected about the x-axis.
    def mirrored(self):
        xmin, ymin, xmax, ymax = self.bounds
        obstacles = [np.column_stack((polygon[:, 0], -polygon[:, 1])) for polygon in self.obstacles]
        return WorldModel((xmin, -ymax, xmax, -ymin), obstacles)


# Signed shoelace area; positive for counter-clockwise vertex order.
def polygon_area(polygon):
    x, y = polygon[:, 0], polygon[:, 1]
    return 0.5 * float((x * np.roll(y, -1) - np.roll(x, -1) * y).sum())
