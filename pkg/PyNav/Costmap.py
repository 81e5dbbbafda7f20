'''
Traversal cost grid derived from the occupancy map.

    FREE       0    far from anything
    1..252          inflation, decaying with distance to the nearest obstacle
    INSCRIBED  253  closer than the inscribed radius: collision is certain
    LETHAL     254  the cell itself is occupied
    UNKNOWN    255  never observed (or not confidently classified)

Distances come from a chamfer distance transform, which is also what the
likelihood-field sensor model scores against.
'''

import math
from dataclasses import dataclass

import numpy as np

from PyNav.Errors import ConfigurationError
from PyNav.OccupancyGrid import GridFrame

FREE = 0
INSCRIBED = 253
LETHAL = 254
UNKNOWN = 255
MAX_INFLATED = 252

# 3-4 chamfer weights: 3 per orthogonal step, 4 per diagonal step.
ORTHOGONAL = 3.0
DIAGONAL = 4.0


@dataclass(frozen = True)
class InflationParams:
    inscribed_radius: float
    circumscribed_radius: float
    inflation_radius: float
    decay_weight: float

    def __post_init__(self):
        if not 0 < self.inscribed_radius <= self.circumscribed_radius <= self.inflation_radius:
            raise ConfigurationError('Need 0 < inscribed <= circumscribed <= inflation radius')
        if not self.decay_weight > 0:
            raise ConfigurationError('decay_weight must be positive')


#------------------------------------------------------------------------------
# DISTANCE TRANSFORM
#------------------------------------------------------------------------------

# Sweeps one row left to right: d[c] = min over j <= c of d[j] + 3 (c - j).
def _sweep(row):
    steps = ORTHOGONAL * np.arange(len(row))
    return steps + np.minimum.accumulate(row - steps)


# Two-pass 3-4 chamfer distance to the nearest True cell of occupied, in
# meters. Without any occupied cell every distance is infinite.
def distance_transform(occupied, resolution = 1.0):
    occupied = np.asarray(occupied, dtype = bool)
    height, width = occupied.shape
    d = np.where(occupied, 0.0, np.inf)

    for r in range(height):
        if r > 0:
            above = d[r - 1]
            d[r] = np.minimum(d[r], above + ORTHOGONAL)
            d[r, 1:] = np.minimum(d[r, 1:], above[:-1] + DIAGONAL)
            d[r, :-1] = np.minimum(d[r, :-1], above[1:] + DIAGONAL)
        d[r] = _sweep(d[r])

    for r in range(height - 1, -1, -1):
        if r < height - 1:
            below = d[r + 1]
            d[r] = np.minimum(d[r], below + ORTHOGONAL)
            d[r, 1:] = np.minimum(d[r, 1:], below[:-1] + DIAGONAL)
            d[r, :-1] = np.minimum(d[r, :-1], below[1:] + DIAGONAL)
        d[r] = _sweep(d[r][::-1])[::-1]

    return d * (resolution / ORTHOGONAL)


# A distance grid laid over a map frame, for lookups by world point.
class DistanceField(GridFrame):
    def __init__(self, frame, distances):
        super().__init__(frame.width, frame.height, frame.resolution, frame.origin)
        self.distances = np.asarray(distances, dtype = float)
        finite = self.distances[np.isfinite(self.distances)]
        # Used for points off the field.
        self.max_distance = float(finite.max()) if len(finite) else math.inf

    @staticmethod
    def from_grid(grid):
        return DistanceField(grid, distance_transform(grid.occupied_mask(), grid.resolution))

    def lookup(self, points):
        rows, cols = self.cell_of(points)
        inside = self.contains(rows, cols)
        out = np.full(len(rows), self.max_distance)
        out[inside] = self.distances[rows[inside], cols[inside]]
        return out


#------------------------------------------------------------------------------
# COSTMAP
#------------------------------------------------------------------------------

class Costmap(GridFrame):
    def __init__(self, width, height, resolution, origin = None, cells = None):
        super().__init__(width, height, resolution, origin)
        if cells is None:
            self.cells = np.zeros((self.height, self.width), dtype = np.uint8)
        else:
            self.cells = np.asarray(cells, dtype = np.uint8).reshape(self.height, self.width)

    # Cells outside the extent are treated as lethal.
    def cost_at(self, x, y):
        rows, cols = self.cell_of([[x, y]])
        if not self.contains(rows, cols)[0]:
            return LETHAL
        return int(self.cells[rows[0], cols[0]])

    def traversable(self):
        return self.cells < INSCRIBED

    # World centers of the lethal cells within radius of (x, y).
    def lethal_points(self, x = None, y = None, radius = None):
        rows, cols = np.nonzero(self.cells == LETHAL)
        points = self.center_of(rows, cols)
        if radius is not None and len(points):
            near = np.hypot(points[:, 0] - x, points[:, 1] - y) <= radius
            points = points[near]
        return points

    def mirrored(self):
        return Costmap(self.width, self.height, self.resolution, self.mirrored_origin(), self.cells[::-1].copy())


def inflation_cost(distance, params):
    cost = np.rint(MAX_INFLATED * np.exp(-params.decay_weight * (distance - params.inscribed_radius)))
    return np.clip(cost, 1, MAX_INFLATED)


def build_costmap(grid, params):
    occupied = grid.occupied_mask()
    unknown = grid.unknown_mask()
    distance = distance_transform(occupied, grid.resolution)

    cells = np.full(grid.shape(), FREE, dtype = np.uint8)
    band = (distance > params.inscribed_radius) & (distance <= params.inflation_radius)
    cells[band] = inflation_cost(distance[band], params).astype(np.uint8)
    cells[(distance > 0) & (distance <= params.inscribed_radius)] = INSCRIBED
    cells[unknown] = UNKNOWN
    cells[occupied] = LETHAL

    return Costmap(grid.width, grid.height, grid.resolution, grid.origin, cells)


def cost_at(costmap, point):
    return costmap.cost_at(point[0], point[1])
