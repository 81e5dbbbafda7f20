'''
Time elastic band local planner.

A band is a sequence of poses s_1..s_n joined by time intervals dt_1..dt_n-1.
The first and last poses are pinned; the interior poses and every interval
are optimized against a sum of squared penalties:

    time            weight_time * dt                    (linear in dt)
    obstacle        max(0, min_obstacle_dist + penalty_epsilon - clearance(s_i))
    velocity        max(0, |s_i+1 - s_i| / dt_i - max_vel)
    acceleration    max(0, |v_i+1 - v_i| / mean(dt_i, dt_i+1) - max_accel)
    kinematics      (cos th_i + cos th_i+1) dy_i - (sin th_i + sin th_i+1) dx_i
    turning radius  max(0, min_turn_radius - |ds_i| / |dth_i|)

Each penalty is written as a residual r with value r^2, so the whole thing
is a least-squares problem solved with Levenberg-Marquardt. Intervals are
stepped in log space; below 2 * DT_MIN a barrier pushes them back up.
'''

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from PyNav.Debug import DEBUG
from PyNav.Errors import ConfigurationError, InvalidTrajectoryError
from PyNav.Geometry import Pose2D, Twist2D, wrap_angle, wrap_angles

DT_MIN = 0.01
BARRIER_WEIGHT = 100.0
# Fraction of max_vel a fresh band is timed for.
INITIAL_SPEED_FRACTION = 0.8
INNER_STEPS = 5
MAX_DAMPING_TRIES = 10
RELATIVE_DECREASE = 1e-6
TINY = 1e-12
TURN_EPSILON = 1e-9


@dataclass(frozen = True)
class TebParams:
    weight_time: float = 1.0
    weight_obstacle: float = 50.0
    weight_velocity: float = 10.0
    weight_acceleration: float = 1.0
    weight_kinematics: float = 100.0
    weight_turning_radius: float = 10.0
    min_obstacle_dist: float = 0.3
    max_vel: float = 0.6
    max_accel: float = 0.5
    min_turn_radius: float = 0.5
    ref_resolution: float = 0.25
    max_iters: int = 10
    # Margin added to min_obstacle_dist inside the obstacle penalty only.
    penalty_epsilon: float = 0.0

    def __post_init__(self):
        if min(self.weights().values()) < 0:
            raise ConfigurationError('TEB weights must be non-negative')
        if not self.min_obstacle_dist > 0:
            raise ConfigurationError('min_obstacle_dist must be positive')
        if self.penalty_epsilon < 0:
            raise ConfigurationError('penalty_epsilon must be non-negative')
        if self.min_turn_radius < 0:
            raise ConfigurationError('min_turn_radius must be non-negative')
        if not self.max_vel > 0 or not self.max_accel > 0:
            raise ConfigurationError('max_vel and max_accel must be positive')
        if not self.ref_resolution > 0:
            raise ConfigurationError('ref_resolution must be positive')

    def weights(self):
        return {
            'time': self.weight_time,
            'obstacle': self.weight_obstacle,
            'velocity': self.weight_velocity,
            'acceleration': self.weight_acceleration,
            'kinematics': self.weight_kinematics,
            'turning_radius': self.weight_turning_radius,
        }


@dataclass(frozen = True, eq = False)
class TebTrajectory:
    poses: tuple
    time_diffs: tuple

    def __post_init__(self):
        object.__setattr__(self, 'poses', tuple(self.poses))
        object.__setattr__(self, 'time_diffs', tuple(float(dt) for dt in self.time_diffs))
        if len(self.poses) < 2:
            raise InvalidTrajectoryError('A band needs at least two poses')
        if len(self.time_diffs) != len(self.poses) - 1:
            raise InvalidTrajectoryError('A band needs one time interval per segment')
        if min(self.time_diffs) < DT_MIN:
            raise InvalidTrajectoryError('Time intervals must be at least %g s' % DT_MIN)
        for pose in self.poses:
            if not all(math.isfinite(value) for value in (pose.x, pose.y, pose.theta)):
                raise InvalidTrajectoryError('Band poses must be finite')

    def pose_array(self):
        return np.array([[p.x, p.y, p.theta] for p in self.poses])

    def duration(self):
        return sum(self.time_diffs)

    def length(self):
        return sum(a.distance_to(b) for a, b in zip(self.poses, self.poses[1:]))

    # Index of the segment running at time t after the start, and how far
    # into it t is (0..1).
    def _segment_at(self, t):
        elapsed = 0.0
        for i, dt in enumerate(self.time_diffs):
            if t < elapsed + dt:
                return i, (t - elapsed) / dt
            elapsed += dt
        return len(self.time_diffs) - 1, 1.0

    # Pose interpolated along the band at time t.
    def pose_at(self, t):
        i, f = self._segment_at(t)
        a, b = self.poses[i], self.poses[i + 1]
        return Pose2D(
            a.x + f * (b.x - a.x),
            a.y + f * (b.y - a.y),
            a.theta + f * wrap_angle(b.theta - a.theta)
        )

    # The twist the band asks for at time t; zero once it has run out.
    def twist_at(self, t):
        if t >= self.duration():
            return Twist2D()
        i, _ = self._segment_at(t)
        return _segment_twist(self.poses[i], self.poses[i + 1], self.time_diffs[i])


def _segment_twist(a, b, dt):
    dx, dy = b.x - a.x, b.y - a.y
    speed = math.hypot(dx, dy) / dt
    if dx * math.cos(a.theta) + dy * math.sin(a.theta) < 0:
        speed = -speed
    return Twist2D(speed, wrap_angle(b.theta - a.theta) / dt)


#------------------------------------------------------------------------------
# INITIALIZATION
#------------------------------------------------------------------------------

# Resamples the global path at (at most) ref_resolution spacing and times it
# for 80% of max_vel. If start is given it replaces the first pose, so the
# band begins at the vehicle's actual heading.
def init_from_global(path, params, start = None):
    points = []
    for waypoint in path.waypoints:
        if not points or math.hypot(waypoint.x - points[-1][0], waypoint.y - points[-1][1]) > TINY:
            points.append((waypoint.x, waypoint.y))
    last = path.waypoints[-1]

    if len(points) < 2:
        first = start or path.waypoints[0]
        return TebTrajectory((first, last), (DT_MIN,))

    points = np.array(points)
    legs = np.hypot(*np.diff(points, axis = 0).T)
    arc = np.concatenate(([0.0], np.cumsum(legs)))
    count = max(1, int(math.ceil(arc[-1] / params.ref_resolution - 1e-9)))
    s = np.linspace(0.0, arc[-1], count + 1)
    xs = np.interp(s, arc, points[:, 0])
    ys = np.interp(s, arc, points[:, 1])

    headings = np.arctan2(np.diff(ys), np.diff(xs))
    poses = [Pose2D(xs[i], ys[i], headings[i]) for i in range(count)]
    poses.append(Pose2D(xs[-1], ys[-1], last.theta))
    if start is not None:
        poses[0] = start

    spacing = np.hypot(np.diff(xs), np.diff(ys))
    dts = np.maximum(spacing / (INITIAL_SPEED_FRACTION * params.max_vel), DT_MIN)
    return TebTrajectory(tuple(poses), tuple(dts))


#------------------------------------------------------------------------------
# OBJECTIVE
#------------------------------------------------------------------------------

# Residual vector and its Jacobian over the free variables: interior poses
# (x, y, theta) in order, then every time interval.
def _residuals(poses, dts, tree, params):
    n = len(poses)
    interior = 3 * (n - 2)
    free = interior + (n - 1)
    count = 5 * (n - 1) + max(n - 2, 0) + n
    r = np.zeros(count)
    J = np.zeros((count, free))

    def pose_column(i, k):
        return 3 * (i - 1) + k if 0 < i < n - 1 else None

    def add(row, i, k, value):
        column = pose_column(i, k)
        if column is not None:
            J[row, column] += value

    def add_dt(row, j, value):
        J[row, interior + j] += value

    sq = {name: math.sqrt(weight) for name, weight in params.weights().items()}
    sb = math.sqrt(BARRIER_WEIGHT)

    d = np.diff(poses[:, 0:2], axis = 0)
    lengths = np.hypot(d[:, 0], d[:, 1])
    dth = wrap_angles(np.diff(poses[:, 2]))
    t = np.maximum(dts, DT_MIN)
    live = dts > DT_MIN
    v = lengths / t

    # dv/d(delta p) and dv/dt per segment.
    unit = np.zeros_like(d)
    moving = lengths > TINY
    unit[moving] = d[moving] / lengths[moving, None]
    dv_dp = unit / t[:, None]
    dv_dt = np.where(live, -lengths / t ** 2, 0.0)

    row = 0
    for j in range(n - 1):
        a, b = j, j + 1

        # time
        r[row] = math.sqrt(params.weight_time * t[j])
        if live[j] and params.weight_time > 0:
            add_dt(row, j, 0.5 * sq['time'] / math.sqrt(t[j]))
        row += 1

        # velocity
        excess = v[j] - params.max_vel
        if excess > 0:
            r[row] = sq['velocity'] * excess
            for k in (0, 1):
                add(row, b, k, sq['velocity'] * dv_dp[j, k])
                add(row, a, k, -sq['velocity'] * dv_dp[j, k])
            add_dt(row, j, sq['velocity'] * dv_dt[j])
        row += 1

        # kinematics
        cos_a, cos_b = math.cos(poses[a, 2]), math.cos(poses[b, 2])
        sin_a, sin_b = math.sin(poses[a, 2]), math.sin(poses[b, 2])
        sk = sq['kinematics']
        r[row] = sk * ((cos_a + cos_b) * d[j, 1] - (sin_a + sin_b) * d[j, 0])
        add(row, a, 0, sk * (sin_a + sin_b))
        add(row, b, 0, -sk * (sin_a + sin_b))
        add(row, a, 1, -sk * (cos_a + cos_b))
        add(row, b, 1, sk * (cos_a + cos_b))
        add(row, a, 2, sk * (-sin_a * d[j, 1] - cos_a * d[j, 0]))
        add(row, b, 2, sk * (-sin_b * d[j, 1] - cos_b * d[j, 0]))
        row += 1

        # turning radius
        turn = abs(dth[j])
        if turn > TURN_EPSILON:
            radius = lengths[j] / turn
            short = params.min_turn_radius - radius
            if short > 0:
                sr = sq['turning_radius']
                r[row] = sr * short
                if moving[j]:
                    for k in (0, 1):
                        add(row, b, k, -sr * unit[j, k] / turn)
                        add(row, a, k, sr * unit[j, k] / turn)
                slope = sr * lengths[j] * math.copysign(1.0, dth[j]) / turn ** 2
                add(row, b, 2, slope)
                add(row, a, 2, -slope)
        row += 1

        # barrier
        low = 2.0 * DT_MIN - dts[j]
        if low > 0:
            r[row] = sb * low
            add_dt(row, j, -sb)
        row += 1

    # acceleration
    for j in range(n - 2):
        T = 0.5 * (t[j] + t[j + 1])
        accel = (v[j + 1] - v[j]) / T
        excess = abs(accel) - params.max_accel
        if excess > 0:
            scale = sq['acceleration'] * math.copysign(1.0, accel)
            r[row] = sq['acceleration'] * excess
            for k in (0, 1):
                add(row, j + 2, k, scale * dv_dp[j + 1, k] / T)
                add(row, j + 1, k, -scale * dv_dp[j + 1, k] / T)
                add(row, j + 1, k, -scale * dv_dp[j, k] / T)
                add(row, j, k, scale * dv_dp[j, k] / T)
            if live[j]:
                add_dt(row, j, scale * (-dv_dt[j] / T - 0.5 * accel / T))
            if live[j + 1]:
                add_dt(row, j + 1, scale * (dv_dt[j + 1] / T - 0.5 * accel / T))
        row += 1

    # obstacles
    if tree is not None:
        clearance, nearest = tree.query(poses[:, 0:2])
        so = sq['obstacle']
        for i in range(n):
            short = params.min_obstacle_dist + params.penalty_epsilon - clearance[i]
            if short > 0:
                r[row + i] = so * short
                if clearance[i] > TINY:
                    away = (poses[i, 0:2] - tree.data[nearest[i]]) / clearance[i]
                    add(row + i, i, 0, -so * away[0])
                    add(row + i, i, 1, -so * away[1])
    row += n

    return r, J


def _tree(obstacles):
    if isinstance(obstacles, cKDTree):
        return obstacles
    obstacles = np.asarray(obstacles, dtype = float).reshape(-1, 2)
    return cKDTree(obstacles) if len(obstacles) else None


def _value(poses, dts, tree, params):
    r, _ = _residuals(poses, dts, tree, params)
    return float(r @ r)


# Objective value and its gradient over the free variables (interior poses
# as x, y, theta triples, then the time intervals).
def objective(teb, obstacles, params):
    r, J = _residuals(teb.pose_array(), np.array(teb.time_diffs), _tree(obstacles), params)
    return float(r @ r), 2.0 * J.T @ r


#------------------------------------------------------------------------------
# OPTIMIZATION
#------------------------------------------------------------------------------

def _apply(poses, dts, step):
    n = len(poses)
    interior = 3 * (n - 2)
    trial = poses.copy()
    if n > 2:
        trial[1:-1] += step[:interior].reshape(n - 2, 3)
        trial[1:-1, 2] = wrap_angles(trial[1:-1, 2])
    trial_dts = np.maximum(dts * np.exp(step[interior:]), DT_MIN * (1.0 + 1e-9))
    return trial, trial_dts


# Inserts a midpoint where consecutive poses are more than two reference
# spacings apart and drops an interior pose that sits closer than half a
# spacing to its predecessor. Returns None when nothing changes.
def _resize(poses, dts, ref):
    n = len(poses)
    new_poses = [poses[0]]
    new_dts = []
    carry = 0.0
    changed = False

    for j in range(n - 1):
        a, b = new_poses[-1], poses[j + 1]
        dt = dts[j] + carry
        carry = 0.0
        spacing = math.hypot(b[0] - a[0], b[1] - a[1])

        if spacing < 0.5 * ref and j + 1 < n - 1:
            carry = dt
            changed = True
        elif spacing > 2.0 * ref:
            middle = np.array([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), wrap_angle(a[2] + 0.5 * wrap_angle(b[2] - a[2]))])
            new_poses.extend([middle, b])
            new_dts.extend([0.5 * dt, 0.5 * dt])
            changed = True
        else:
            new_poses.append(b)
            new_dts.append(dt)

    if not changed:
        return None
    return np.array(new_poses), np.maximum(np.array(new_dts), DT_MIN * (1.0 + 1e-9))


def _band(teb, poses, dts):
    interior = [Pose2D.from_array(p) for p in poses[1:-1]]
    return TebTrajectory((teb.poses[0],) + tuple(interior) + (teb.poses[-1],), tuple(dts))


# Damped Gauss-Newton on the residuals. Only steps that lower the objective
# are taken, and a band resize that raises it is undone. callback, if given,
# sees (iteration, objective) after every outer iteration.
def optimize(teb, obstacles, params, max_iters = None, callback = None):
    max_iters = params.max_iters if max_iters is None else max_iters
    tree = _tree(obstacles)
    poses = teb.pose_array()
    dts = np.array(teb.time_diffs)

    value = _value(poses, dts, tree, params)
    if not math.isfinite(value):
        raise InvalidTrajectoryError('Objective is not finite for the initial band')
    if max_iters <= 0:
        return teb

    damping = 1e-3
    for iteration in range(max_iters):
        previous = value

        for _ in range(INNER_STEPS):
            r, J = _residuals(poses, dts, tree, params)
            interior = 3 * (len(poses) - 2)
            J[:, interior:] *= dts
            gradient = J.T @ r
            normal = J.T @ J

            accepted = False
            for _ in range(MAX_DAMPING_TRIES):
                damped = normal + damping * np.diag(np.diag(normal) + 1e-9)
                try:
                    step = np.linalg.solve(damped, -gradient)
                except np.linalg.LinAlgError:
                    damping *= 10.0
                    continue

                trial_poses, trial_dts = _apply(poses, dts, step)
                trial_value = _value(trial_poses, trial_dts, tree, params)
                if math.isfinite(trial_value) and trial_value < value:
                    poses, dts, value = trial_poses, trial_dts, trial_value
                    damping = max(damping / 10.0, 1e-9)
                    accepted = True
                    break
                damping *= 10.0

            if not accepted:
                break

        resized = _resize(poses, dts, params.ref_resolution)
        if resized is not None:
            resized_value = _value(resized[0], resized[1], tree, params)
            if resized_value <= value:
                DEBUG.write('TEB band resized from %d to %d poses' % (len(poses), len(resized[0])))
                poses, dts = resized
                value = resized_value

        if callback is not None:
            callback(iteration, value)

        if previous - value <= RELATIVE_DECREASE * abs(previous):
            break

    return _band(teb, poses, dts)


def command_from_teb(teb):
    return _segment_twist(teb.poses[0], teb.poses[1], teb.time_diffs[0])
