'''
SVG frames of a run: the map, the world's obstacles, the ground-truth and
estimated tracks so far and, when the step has a snapshot, the particle
cloud, the global path and the current band.
'''

import math
import os

import matplotlib as mpl
mpl.use('Agg')

import matplotlib.pyplot as plt
from matplotlib.patches import Polygon

from PyNav.Debug import DEBUG

mpl.rcParams['svg.hashsalt'] = 'pynav'
mpl.rcParams['font.size'] = 8

FIGSIZE = (6.0, 6.0)


def frame_steps(count, every_n):
    if every_n < 1:
        raise ValueError('every_n must be at least 1')
    return list(range(0, count, every_n)) or [0]


def _draw_map(ax, grid):
    x0, y0 = grid.origin.x, grid.origin.y
    extent = (x0, x0 + grid.width * grid.resolution, y0, y0 + grid.height * grid.resolution)
    ax.imshow(
        grid.probabilities(), origin = 'lower', extent = extent,
        cmap = 'Greys', vmin = 0.0, vmax = 1.0, interpolation = 'nearest'
    )


def _draw_pose(ax, pose, color):
    ax.plot([pose.x], [pose.y], marker = 'o', markersize = 4, color = color)
    ax.plot(
        [pose.x, pose.x + 0.3 * math.cos(pose.theta)],
        [pose.y, pose.y + 0.3 * math.sin(pose.theta)],
        color = color, linewidth = 1.0
    )


def render_frame(path, log, grid, step, world = None):
    fig, ax = plt.subplots(figsize = FIGSIZE)
    try:
        _draw_map(ax, grid)
        if world is not None:
            for polygon in world.obstacles:
                ax.add_patch(Polygon(polygon, closed = True, fill = False, edgecolor = 'tab:brown', linewidth = 1.0))

        records = log.records[:step + 1]
        ax.plot([r.ground_truth.x for r in records], [r.ground_truth.y for r in records], color = 'tab:green', linewidth = 1.0, label = 'ground truth')
        ax.plot([r.estimate.x for r in records], [r.estimate.y for r in records], color = 'tab:blue', linewidth = 1.0, linestyle = '--', label = 'estimate')

        snapshot = log.snapshots.get(step)
        if snapshot is not None:
            if snapshot.particles is not None and len(snapshot.particles):
                ax.scatter(snapshot.particles[:, 0], snapshot.particles[:, 1], s = 1, color = 'tab:red', alpha = 0.4)
            if snapshot.global_path is not None and len(snapshot.global_path):
                ax.plot(snapshot.global_path[:, 0], snapshot.global_path[:, 1], color = 'tab:orange', linewidth = 0.8, label = 'global path')
            if snapshot.band is not None and len(snapshot.band):
                ax.plot(snapshot.band[:, 0], snapshot.band[:, 1], color = 'tab:purple', marker = '.', markersize = 3, linewidth = 1.0, label = 'band')

        current = log.records[step]
        _draw_pose(ax, current.ground_truth, 'tab:green')
        _draw_pose(ax, current.estimate, 'tab:blue')

        ax.set_aspect('equal')
        ax.set_title('t = %.2f s' % current.t)
        ax.legend(loc = 'upper right')
        fig.savefig(path, format = 'svg', metadata = {'Date': None})
    finally:
        plt.close(fig)


# One frame every every_n steps, counting from the first. Returns the paths
# written.
def render_frames(log, grid, out_dir, every_n, world = None):
    os.makedirs(out_dir, exist_ok = True)
    paths = []
    for step in frame_steps(len(log.records), every_n):
        if step >= len(log.records):
            break
        path = os.path.join(out_dir, 'frame_%05d.svg' % step)
        render_frame(path, log, grid, step, world)
        paths.append(path)

    DEBUG.write('Rendered %d frames to %s' % (len(paths), out_dir))
    return paths
