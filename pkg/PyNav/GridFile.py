'''
Plain-text grid files, shared by occupancy maps and costmaps:

    NAVGRID 1 <occupancy|cost>
    <width> <height>
    <resolution>
    <origin_x> <origin_y> <origin_theta>
    <height rows of width integers 0..255>

Occupancy cells are written as round(254 * p), with 255 for cells that were
never observed. Cost cells are written as they are.
'''

import math

import numpy as np

from PyNav.Costmap import Costmap
from PyNav.Errors import GridFormatError, MissingMapError
from PyNav.Geometry import Pose2D
from PyNav.OccupancyGrid import L_MAX, L_MIN, OccupancyGrid

MAGIC = 'NAVGRID'
VERSION = '1'
UNOBSERVED = 255
# Log-odds given to an observed cell that reads back as exactly p = 0.5, so
# it stays distinct from a never-observed cell.
EVEN_ODDS = 1e-12


def encode_occupancy(grid):
    codes = np.rint(254.0 * grid.probabilities()).astype(np.int64)
    codes[~grid.observed_mask()] = UNOBSERVED
    return codes


def decode_occupancy(codes):
    codes = np.asarray(codes)
    observed = codes != UNOBSERVED
    # Unobserved cells are read as even odds so the logs stay defined.
    p = np.where(observed, codes, 127) / 254.0
    with np.errstate(divide = 'ignore'):
        cells = np.log(p) - np.log1p(-p)
    cells = np.clip(cells, L_MIN, L_MAX)
    cells[cells == 0.0] = EVEN_ODDS
    cells[~observed] = 0.0
    return cells


def write_grid(path, grid):
    if isinstance(grid, Costmap):
        kind, codes = 'cost', grid.cells.astype(np.int64)
    elif isinstance(grid, OccupancyGrid):
        kind, codes = 'occupancy', encode_occupancy(grid)
    else:
        raise GridFormatError('Cannot write %s as a grid file' % type(grid).__name__)

    lines = [
        '%s %s %s' % (MAGIC, VERSION, kind),
        '%d %d' % (grid.width, grid.height),
        repr(grid.resolution),
        '%r %r %r' % (grid.origin.x, grid.origin.y, grid.origin.theta),
    ]
    lines.extend(' '.join(str(int(value)) for value in row) for row in codes)

    with open(path, 'w', newline = '\n') as handle:
        handle.write('\n'.join(lines) + '\n')


def read_grid(path):
    try:
        with open(path, 'r', newline = '') as handle:
            lines = handle.read().split('\n')
    except FileNotFoundError:
        raise MissingMapError('No grid file at %s' % path)

    if lines and lines[-1] == '':
        lines.pop()
    if len(lines) < 4:
        raise GridFormatError('%s: truncated header' % path)

    header = lines[0].split()
    if len(header) != 3 or header[0] != MAGIC or header[1] != VERSION or header[2] not in ('occupancy', 'cost'):
        raise GridFormatError('%s: not a NAVGRID 1 file' % path)
    kind = header[2]

    try:
        width, height = [int(part) for part in lines[1].split()]
        resolution = float(lines[2])
        ox, oy, otheta = [float(part) for part in lines[3].split()]
        rows = [[int(part) for part in line.split()] for line in lines[4:]]
    except ValueError as err:
        raise GridFormatError('%s: %s' % (path, err))

    if width < 1 or height < 1 or not resolution > 0 or not all(map(math.isfinite, (resolution, ox, oy, otheta))):
        raise GridFormatError('%s: invalid grid geometry' % path)
    if len(rows) != height or any(len(row) != width for row in rows):
        raise GridFormatError('%s: expected %d rows of %d cells' % (path, height, width))

    codes = np.array(rows, dtype = np.int64)
    if (codes < 0).any() or (codes > 255).any():
        raise GridFormatError('%s: cell values must lie in 0..255' % path)

    origin = Pose2D(ox, oy, otheta)
    if kind == 'cost':
        return Costmap(width, height, resolution, origin, codes)
    return OccupancyGrid(width, height, resolution, origin, decode_occupancy(codes))
