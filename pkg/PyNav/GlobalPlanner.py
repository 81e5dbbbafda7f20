'''
Dijkstra over the 8-connected costmap.

Moving between neighbouring cells a and b costs

    length * (1 + cost_scale * (cost(a) + cost(b)) / 2 / 252)

with length 1 or sqrt(2) cells. Cells at INSCRIBED or above are walls. A
diagonal move is not allowed to squeeze between two lethal cells.
'''

import heapq
import math
from dataclasses import dataclass

import numpy as np

from PyNav.Costmap import INSCRIBED, LETHAL, MAX_INFLATED
from PyNav.Debug import DEBUG
from PyNav.Errors import BlockedEndpointError, NoPathError
from PyNav.Geometry import Pose2D

NEIGHBOURS = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)


@dataclass(frozen = True)
class GlobalPath:
    waypoints: tuple
    total_cost: float = 0.0

    def as_array(self):
        return np.array([[p.x, p.y, p.theta] for p in self.waypoints])

    def length(self):
        return sum(a.distance_to(b) for a, b in zip(self.waypoints, self.waypoints[1:]))


def _endpoint(costmap, pose, name):
    rows, cols = costmap.cell_of([[pose.x, pose.y]])
    cell = (int(rows[0]), int(cols[0]))
    if not costmap.contains(rows, cols)[0] or costmap.cells[cell] >= INSCRIBED:
        raise BlockedEndpointError('%s (%.3f, %.3f) is not traversable' % (name, pose.x, pose.y))
    return cell


def plan(costmap, start, goal, cost_scale = 3.0):
    source = _endpoint(costmap, start, 'Start')
    target = _endpoint(costmap, goal, 'Goal')

    cells = costmap.cells.astype(float).tolist()
    height, width = costmap.shape()
    distance = {source: 0.0}
    previous = {source: None}
    done = set()
    queue = [(0.0, source)]

    while queue:
        d, cell = heapq.heappop(queue)
        if cell in done:
            continue
        done.add(cell)
        if cell == target:
            break

        r, c = cell
        for dr, dc in NEIGHBOURS:
            nr, nc = r + dr, c + dc
            if not (0 <= nr < height and 0 <= nc < width) or cells[nr][nc] >= INSCRIBED:
                continue
            if dr and dc:
                if cells[r][nc] == LETHAL and cells[nr][c] == LETHAL:
                    continue
                length = math.sqrt(2.0)
            else:
                length = 1.0

            neighbour = (nr, nc)
            if neighbour in done:
                continue
            step = length * (1.0 + cost_scale * 0.5 * (cells[r][c] + cells[nr][nc]) / MAX_INFLATED)
            candidate = d + step
            known = distance.get(neighbour)
            if known is None or candidate < known:
                distance[neighbour] = candidate
                previous[neighbour] = cell
                heapq.heappush(queue, (candidate, neighbour))
            elif candidate == known and cell < previous[neighbour]:
                previous[neighbour] = cell

    if target not in done:
        DEBUG.write('No path from %s to %s' % (source, target))
        raise NoPathError('No traversable route from (%.3f, %.3f) to (%.3f, %.3f)' % (start.x, start.y, goal.x, goal.y))

    cells_on_path = []
    cell = target
    while cell is not None:
        cells_on_path.append(cell)
        cell = previous[cell]
    cells_on_path.reverse()

    rows = np.array([cell[0] for cell in cells_on_path])
    cols = np.array([cell[1] for cell in cells_on_path])
    centers = costmap.center_of(rows, cols)

    waypoints = []
    for i, (x, y) in enumerate(centers):
        if i + 1 < len(centers):
            theta = math.atan2(centers[i + 1][1] - y, centers[i + 1][0] - x)
        else:
            theta = goal.theta
        waypoints.append(Pose2D(float(x), float(y), theta))

    return GlobalPath(tuple(waypoints), distance[target])
