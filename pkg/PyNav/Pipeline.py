'''
The two runs a scenario supports, in the order they have to happen.

run_mapping drives the scripted commands through the simulator, builds the
occupancy map with scan-to-map SLAM and writes it (plus the SLAM
trajectory). run_navigation loads that map and visits the goals with the
full loop at the control rate:

    MCL + EKF fusion -> costmap -> Dijkstra -> TEB -> PID / Ackermann -> sim

Every random draw comes from streams split off the scenario seed, so a run
is reproducible bit for bit.
'''

import csv
import math
from dataclasses import dataclass

import numpy as np

from PyNav.Controller import PidGains, PidMemory, ackermann_convert, pid_track
from PyNav.Costmap import Costmap, InflationParams, build_costmap
from PyNav.Debug import DEBUG
from PyNav.Ekf import EkfState, FusionFilter
from PyNav.Errors import (
    BlockedEndpointError, CollisionError, ConfigurationError, DegenerateScanError,
    GridFormatError, InvalidTrajectoryError, NoPathError,
)
from PyNav.Geometry import DriveCommand, Pose2D, Twist2D, arc_advance
from PyNav.GlobalPlanner import GlobalPath, plan
from PyNav.GridFile import read_grid, write_grid
from PyNav.Imu import sample_imu
from PyNav.Lidar import cast_scan, corrupt_scan
from PyNav.Mcl import Localizer
from PyNav.OccupancyGrid import OccupancyGrid
from PyNav.Render import render_frames
from PyNav.RunLog import GoalSummary, RunLog, Snapshot, StepRecord
from PyNav.ScanMatcher import ScanMatcher
from PyNav.Slam import Mapper
from PyNav.TebPlanner import TebParams, init_from_global, optimize
from PyNav.Vehicle import VehicleState, step_vehicle

TRAJECTORY_HEADER = ['t', 'slam_x', 'slam_y', 'slam_theta', 'gt_x', 'gt_y', 'gt_theta']
# Particles kept per rendered snapshot.
SNAPSHOT_PARTICLES = 500
# Share of goal_tol_xy a goal counts as reached at while still approaching.
ARRIVAL_FRACTION = 0.5


# Independent generators for the LIDAR noise, the IMU noise and the filter.
def streams(seed):
    lidar, imu, mcl = np.random.SeedSequence(seed).spawn(3)
    return np.random.default_rng(lidar), np.random.default_rng(imu), np.random.default_rng(mcl)


# Free distance between the vehicle footprint and the world; 0 on contact.
def footprint_clearance(scenario, pose):
    return max(0.0, scenario.world.clearance(pose.x, pose.y) - scenario.vehicle.footprint_radius_circumscribed)


def _collision(t, pose):
    DEBUG.warn('Collision at t=%.2f s, pose (%.3f, %.3f, %.3f)' % (t, pose.x, pose.y, pose.theta))
    return CollisionError('Collision at t=%.2f s at (%.3f, %.3f)' % (t, pose.x, pose.y), t, pose)


def _sense(scenario, pose, t, rng):
    return corrupt_scan(cast_scan(scenario.world, pose, scenario.lidar, t), scenario.noise, rng)


#------------------------------------------------------------------------------
# MAPPING
#------------------------------------------------------------------------------

@dataclass(frozen = True, eq = False)
class MappingResult:
    grid: OccupancyGrid
    # Rows of (t, slam pose, ground-truth pose), one per processed scan.
    trajectory: tuple
    skipped: int


def trajectory_path(map_path):
    return str(map_path) + '.trajectory.csv'


def write_trajectory(path, rows):
    with open(path, 'w', newline = '') as handle:
        writer = csv.writer(handle, lineterminator = '\n')
        writer.writerow(TRAJECTORY_HEADER)
        for t, slam, gt in rows:
            writer.writerow(['%.9g' % value for value in (t, slam.x, slam.y, slam.theta, gt.x, gt.y, gt.theta)])


def _mapping_log(rows, commands):
    log = RunLog()
    for (t, slam, gt), command in zip(rows, commands):
        log.add_step(StepRecord(t, gt, slam, slam, command, 0.0))
    return log


def run_mapping(scenario, map_path = None, render_dir = None, every_n = 10):
    if not scenario.mapping:
        raise ConfigurationError('Scenario has no mapping commands')

    config = scenario.config
    lidar_rng, _, _ = streams(scenario.seed)
    dt = scenario.control_period()
    scan_every = max(1, int(config.get('slam', 'scan_every')))

    grid = OccupancyGrid.covering(scenario.world.bounds, config.get('slam', 'resolution'), config.get('slam', 'margin'))
    mapper = Mapper(grid, scenario.start, int(config.get('slam', 'max_iterations')), config.get('slam', 'max_step'))
    state = VehicleState(scenario.start)

    t = 0.0
    mapper.update(_sense(scenario, state.pose, t, lidar_rng))
    rows = [(t, mapper.pose, state.pose)]
    commands = [DriveCommand()]

    step = 0
    for timed in scenario.mapping:
        for _ in range(int(round(timed.duration / dt))):
            state = step_vehicle(state, timed.command, dt, scenario.vehicle)
            step += 1
            t = step * dt
            if footprint_clearance(scenario, state.pose) <= 0.0:
                raise _collision(t, state.pose)

            if step % scan_every == 0:
                mapper.update(_sense(scenario, state.pose, t, lidar_rng))
                rows.append((t, mapper.pose, state.pose))
                commands.append(timed.command)

    DEBUG.write('Mapping done: %d scans, %d skipped' % (len(rows), mapper.skipped))

    if map_path is not None:
        write_grid(map_path, grid)
        write_trajectory(trajectory_path(map_path), rows)
    if render_dir is not None:
        render_frames(_mapping_log(rows, commands), grid, render_dir, every_n, scenario.world)

    return MappingResult(grid, tuple(rows), mapper.skipped)


#------------------------------------------------------------------------------
# NAVIGATION
#------------------------------------------------------------------------------

def load_map(map_path):
    grid = read_grid(map_path)
    if isinstance(grid, Costmap):
        raise GridFormatError('%s holds a costmap, navigation needs an occupancy map' % map_path)
    return grid


def teb_params(config, vehicle):
    return TebParams(
        config.get('teb', 'weight_time'),
        config.get('teb', 'weight_obstacle'),
        config.get('teb', 'weight_velocity'),
        config.get('teb', 'weight_acceleration'),
        config.get('teb', 'weight_kinematics'),
        config.get('teb', 'weight_turning_radius'),
        max(config.get('teb', 'min_obstacle_dist'), vehicle.footprint_radius_circumscribed),
        min(config.get('teb', 'max_vel'), vehicle.max_speed),
        config.get('teb', 'max_accel'),
        max(config.get('teb', 'min_turn_radius'), vehicle.min_turn_radius()),
        config.get('teb', 'ref_resolution'),
        int(config.get('teb', 'max_iters')),
        config.get('teb', 'penalty_epsilon'),
    )


# Configured process noise, with the twist entries raised to what the
# vehicle can do within one control period: reach full speed from standing,
# or the tightest turn at full speed.
def ekf_process_noise(config, vehicle, dt):
    noise = [float(value) for value in config.get('ekf', 'process_noise')]
    max_omega = vehicle.max_speed / vehicle.min_turn_radius()
    noise[3] = max(noise[3], vehicle.max_speed ** 2 / dt)
    noise[4] = max(noise[4], max_omega ** 2 / dt)
    return noise


def pid_gains(config, vehicle):
    return PidGains(
        config.get('controller', 'kp_linear'),
        config.get('controller', 'ki_linear'),
        config.get('controller', 'kd_linear'),
        config.get('controller', 'kp_angular'),
        config.get('controller', 'ki_angular'),
        config.get('controller', 'kd_angular'),
        config.get('controller', 'integral_limit'),
        vehicle.max_speed,
        config.get('controller', 'max_omega'),
    )


# Holds everything that lives across control steps of one navigation run.
class Navigator:
    def __init__(self, scenario, grid, keep_snapshots = False):
        config = scenario.config
        vehicle = scenario.vehicle
        self.scenario = scenario
        self.config = config
        self.grid = grid
        self.keep_snapshots = keep_snapshots
        self.dt = scenario.control_period()
        self.lidar_rng, self.imu_rng, mcl_rng = streams(scenario.seed)

        inflation = InflationParams(
            vehicle.footprint_radius_inscribed,
            vehicle.footprint_radius_circumscribed,
            max(config.get('costmap', 'inflation_radius'), vehicle.footprint_radius_circumscribed),
            config.get('costmap', 'decay_weight'),
        )
        self.costmap = build_costmap(grid, inflation)
        self.teb = teb_params(config, vehicle)
        self.gains = pid_gains(config, vehicle)
        self.memory = PidMemory()
        self.matcher = ScanMatcher()

        self.ekf = FusionFilter(
            EkfState.at(scenario.start, covariance = config.get('ekf', 'initial_cov')),
            ekf_process_noise(config, vehicle, self.dt),
            config.get('ekf', 'r_twist'),
            config.get('ekf', 'r_yaw_rate'),
            config.get('ekf', 'r_pose'),
            int(config.get('ekf', 'max_pose_rejections')),
        )
        self.odometry = scenario.start
        self.localizer = Localizer.from_config(grid, config, mcl_rng, scenario.start, self.odometry)

        self.state = VehicleState(scenario.start)
        self.t = 0.0
        self.steps = 0
        self.scan = _sense(scenario, self.state.pose, self.t, self.lidar_rng)
        self.log = RunLog()

        # The filter gets one look at the map before anything moves.
        self.localizer.update(self.odometry, self.scan, force = True)

        self.path = None
        self.progress = 0
        self.band = None
        self.band_time = 0.0

    def estimate(self):
        return self.ekf.state.pose()

    def reached(self, goal):
        pose = self.estimate()
        return (
            pose.distance_to(goal) < self.config.get('run', 'goal_tol_xy') and
            abs(Pose2D(0, 0, goal.theta - pose.theta).theta) < self.config.get('run', 'goal_tol_theta')
        )

    # Within tolerance, and either well inside it or no longer closing in
    # on the goal since the previous step.
    def arrived(self, goal, previous):
        if not self.reached(goal):
            return False
        distance = self.estimate().distance_to(goal)
        return distance < ARRIVAL_FRACTION * self.config.get('run', 'goal_tol_xy') or distance >= previous

    #------------------------------------------------------------------------------
    # PLANNING
    #------------------------------------------------------------------------------

    def plan_to(self, goal):
        self.path = plan(self.costmap, self.estimate(), goal, self.config.get('planner', 'cost_scale'))
        self.progress = 0
        self.band = None
        DEBUG.write('Global path to (%.2f, %.2f): %d cells, cost %.2f' % (goal.x, goal.y, len(self.path.waypoints), self.path.total_cost))

    # The stretch of the global path ahead of pose, up to the horizon. The
    # final waypoint is swapped for the goal itself.
    def local_path(self, pose, goal):
        waypoints = self.path.waypoints
        window = waypoints[self.progress:]
        distances = [pose.distance_to(w) for w in window]
        self.progress += int(np.argmin(distances))

        begin = min(self.progress + 1, len(waypoints) - 1)
        horizon = self.config.get('teb', 'horizon')
        local = [waypoints[begin]]
        length = 0.0
        for waypoint in waypoints[begin + 1:]:
            length += local[-1].distance_to(waypoint)
            if length > horizon:
                break
            local.append(waypoint)
        if local[-1] is waypoints[-1]:
            local[-1] = goal

        return GlobalPath((pose,) + tuple(local))

    def replan_band(self, goal):
        pose = self.estimate()
        band = init_from_global(self.local_path(pose, goal), self.teb, start = pose)
        obstacles = self.costmap.lethal_points(pose.x, pose.y, self.config.get('teb', 'obstacle_radius'))
        try:
            band = optimize(band, obstacles, self.teb)
        except InvalidTrajectoryError as err:
            DEBUG.write('TEB kept the initial band: %s' % err)
        self.band = band
        self.band_time = 0.0

    def command(self):
        pose = self.estimate()
        feedforward = self.band.twist_at(self.band_time)
        target = self.band.pose_at(self.band_time + self.config.get('run', 'lookahead'))
        twist = pid_track(pose, feedforward, target, self.gains, self.dt, self.memory)
        vehicle = self.scenario.vehicle
        return ackermann_convert(twist, vehicle.wheelbase, vehicle.max_steer, vehicle.max_speed)

    #------------------------------------------------------------------------------
    # SIMULATION AND ESTIMATION
    #------------------------------------------------------------------------------

    # Applies cmd for one control period, then runs every estimator on the
    # new sensor data and logs the step.
    def advance(self, cmd):
        previous = self.state
        self.state = step_vehicle(self.state, cmd, self.dt, self.scenario.vehicle)
        self.steps += 1
        self.t = self.steps * self.dt
        clearance = footprint_clearance(self.scenario, self.state.pose)

        if clearance <= 0.0:
            self.record(cmd, clearance)
            raise _collision(self.t, self.state.pose)

        imu = sample_imu(previous, self.state, self.dt, self.scenario.imu_noise, self.imu_rng, self.t)
        scan = _sense(self.scenario, self.state.pose, self.t, self.lidar_rng)

        self.ekf.predict(self.dt)
        self.ekf.update_yaw_rate(imu.yaw_rate)
        self.update_laser_odometry(scan)
        self.scan = scan

        twist = self.ekf.state.twist()
        self.odometry = arc_advance(self.odometry, twist.v, twist.omega, self.dt)
        if self.localizer.update(self.odometry, scan):
            self.ekf.update_pose(self.localizer.estimate(), self.localizer.covariance)

        self.record(cmd, clearance)

    def update_laser_odometry(self, scan):
        twist = self.ekf.state.twist()
        guess = arc_advance(Pose2D(), twist.v, twist.omega, self.dt)
        try:
            match = self.matcher.match(self.scan, scan, guess)
        except DegenerateScanError:
            return
        if not match.ok:
            return

        covariance = np.diag([match.covariance[0, 0], match.covariance[2, 2]]) / self.dt ** 2
        self.ekf.update_twist(Twist2D(match.delta.x / self.dt, match.delta.theta / self.dt), covariance)

    def record(self, cmd, clearance):
        snapshot = None
        if self.keep_snapshots:
            particles = self.localizer.particles.poses
            snapshot = Snapshot(
                particles[:SNAPSHOT_PARTICLES, 0:2].copy(),
                None if self.path is None else self.path.as_array(),
                None if self.band is None else self.band.pose_array(),
            )
        self.log.add_step(StepRecord(
            self.t, self.state.pose, self.estimate(), self.localizer.estimate(self.odometry), cmd, clearance,
        ), snapshot)

    #------------------------------------------------------------------------------
    # GOALS
    #------------------------------------------------------------------------------

    def visit(self, goal):
        begin = self.t
        travelled = 0.0
        timeout = self.config.get('run', 'goal_timeout')
        replan_every = max(1, int(self.config.get('run', 'teb_replan_every')))

        def summary(reached, reason = ''):
            return GoalSummary(goal, reached, self.t - begin, travelled, reason)

        try:
            self.plan_to(goal)
        except (BlockedEndpointError, NoPathError) as err:
            DEBUG.warn('Goal (%.2f, %.2f) failed: %s' % (goal.x, goal.y, err))
            return summary(False, 'no path')

        self.memory.reset()
        count = 0
        previous = math.inf
        while True:
            if self.arrived(goal, previous):
                DEBUG.write('Goal (%.2f, %.2f) reached after %.2f s' % (goal.x, goal.y, self.t - begin))
                return summary(True)
            if self.t - begin >= timeout:
                DEBUG.warn('Goal (%.2f, %.2f) timed out' % (goal.x, goal.y))
                return summary(False, 'timeout')
            previous = self.estimate().distance_to(goal)

            if count % replan_every == 0:
                self.replan_band(goal)
            cmd = self.command()

            before = self.state.pose
            self.advance(cmd)
            travelled += before.distance_to(self.state.pose)
            self.band_time += self.dt
            count += 1


def run_navigation(scenario, map_path, log_path = None, render_dir = None, every_n = 10):
    grid = load_map(map_path)
    navigator = Navigator(scenario, grid, keep_snapshots = render_dir is not None)

    try:
        for goal in scenario.goals:
            navigator.log.add_goal(navigator.visit(goal))
    finally:
        if log_path is not None:
            navigator.log.write(log_path)
        if render_dir is not None and len(navigator.log):
            render_frames(navigator.log, grid, render_dir, every_n, scenario.world)

    return navigator.log
