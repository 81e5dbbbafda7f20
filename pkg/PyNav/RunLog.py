'''
What a navigation run leaves behind: one record per control step, one
summary per goal, and (when rendering) a snapshot of the planner and filter
state per step.

The step log is a CSV with nine significant digits; goal summaries go to a
second CSV next to it (<log>.goals.csv).
'''

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

from PyNav.Errors import EmptyLogError, InputDomainError
from PyNav.Geometry import DriveCommand, Pose2D, wrap_angles

STEP_HEADER = [
    't', 'gt_x', 'gt_y', 'gt_theta', 'est_x', 'est_y', 'est_theta',
    'mcl_x', 'mcl_y', 'mcl_theta', 'cmd_v', 'cmd_phi', 'min_clearance',
]
GOAL_HEADER = ['goal_x', 'goal_y', 'goal_theta', 'reached', 'time', 'path_length', 'reason']


@dataclass(frozen = True)
class StepRecord:
    t: float
    ground_truth: Pose2D
    estimate: Pose2D
    mcl: Pose2D
    command: DriveCommand
    min_clearance: float


@dataclass(frozen = True)
class GoalSummary:
    goal: Pose2D
    reached: bool
    time: float
    path_length: float
    reason: str = ''


# Planner and filter state at one step, for the renderer.
@dataclass(frozen = True, eq = False)
class Snapshot:
    particles: np.ndarray = None
    global_path: np.ndarray = None
    band: np.ndarray = None


@dataclass(frozen = True)
class Metrics:
    steps: int
    goals: int
    reached: int
    success_rate: float
    rms_position_error: float
    rms_heading_error: float
    min_clearance: float
    collision: bool
    total_time: float
    goal_times: tuple = field(default_factory = tuple)
    goal_lengths: tuple = field(default_factory = tuple)

    def lines(self):
        out = [
            'steps %d' % self.steps,
            'goals %d reached %d success_rate %.9g' % (self.goals, self.reached, self.success_rate),
            'rms_position_error %.9g' % self.rms_position_error,
            'rms_heading_error %.9g' % self.rms_heading_error,
            'min_clearance %.9g' % self.min_clearance,
            'collision %s' % ('yes' if self.collision else 'no'),
            'total_time %.9g' % self.total_time,
        ]
        for i, (time, length) in enumerate(zip(self.goal_times, self.goal_lengths)):
            out.append('goal %d time %.9g path_length %.9g' % (i + 1, time, length))
        return out


class RunLog:
    def __init__(self):
        self.records = []
        self.goals = []
        self.snapshots = {}

    def __len__(self):
        return len(self.records)

    def add_step(self, record, snapshot = None):
        if self.records and not record.t > self.records[-1].t:
            raise InputDomainError('Log timestamps must be strictly increasing')
        if snapshot is not None:
            self.snapshots[len(self.records)] = snapshot
        self.records.append(record)

    def add_goal(self, summary):
        self.goals.append(summary)

    def goals_reached(self):
        return sum(1 for goal in self.goals if goal.reached)

    def failed_goals(self):
        return [goal for goal in self.goals if not goal.reached]

    #------------------------------------------------------------------------------
    # FILES
    #------------------------------------------------------------------------------

    @staticmethod
    def goals_path(path):
        return str(path) + '.goals.csv'

    def write(self, path):
        with open(path, 'w', newline = '') as handle:
            writer = csv.writer(handle, lineterminator = '\n')
            writer.writerow(STEP_HEADER)
            for r in self.records:
                writer.writerow([_fmt(value) for value in (
                    r.t,
                    r.ground_truth.x, r.ground_truth.y, r.ground_truth.theta,
                    r.estimate.x, r.estimate.y, r.estimate.theta,
                    r.mcl.x, r.mcl.y, r.mcl.theta,
                    r.command.v, r.command.phi, r.min_clearance,
                )])

        with open(RunLog.goals_path(path), 'w', newline = '') as handle:
            writer = csv.writer(handle, lineterminator = '\n')
            writer.writerow(GOAL_HEADER)
            for g in self.goals:
                writer.writerow([
                    _fmt(g.goal.x), _fmt(g.goal.y), _fmt(g.goal.theta),
                    int(g.reached), _fmt(g.time), _fmt(g.path_length), g.reason,
                ])

    @staticmethod
    def read(path):
        log = RunLog()
        with open(path, 'r', newline = '') as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != STEP_HEADER:
                raise InputDomainError('%s is not a run log' % path)
            for row in reader:
                try:
                    if len(row) != len(STEP_HEADER):
                        raise ValueError('expected %d fields, got %d' % (len(STEP_HEADER), len(row)))
                    values = [float(value) for value in row]
                    log.records.append(StepRecord(
                        values[0],
                        Pose2D(*values[1:4]),
                        Pose2D(*values[4:7]),
                        Pose2D(*values[7:10]),
                        DriveCommand(values[10], values[11]),
                        values[12],
                    ))
                except ValueError as err:
                    raise InputDomainError('%s line %d: %s' % (path, reader.line_num, err))

        goals = RunLog.goals_path(path)
        if os.path.exists(goals):
            with open(goals, 'r', newline = '') as handle:
                reader = csv.DictReader(handle)
                for row in reader:
                    try:
                        log.goals.append(GoalSummary(
                            Pose2D(float(row['goal_x']), float(row['goal_y']), float(row['goal_theta'])),
                            row['reached'] == '1',
                            float(row['time']),
                            float(row['path_length']),
                            row['reason'],
                        ))
                    except (KeyError, TypeError, ValueError) as err:
                        raise InputDomainError('%s line %d: bad goal row (%s)' % (goals, reader.line_num, err))
        return log


def _fmt(value):
    return '%.9g' % value


def compute_metrics(log):
    if not log.records:
        raise EmptyLogError('Run log has no steps')

    gt = np.array([[r.ground_truth.x, r.ground_truth.y, r.ground_truth.theta] for r in log.records])
    est = np.array([[r.estimate.x, r.estimate.y, r.estimate.theta] for r in log.records])
    clearance = np.array([r.min_clearance for r in log.records])

    position = np.hypot(est[:, 0] - gt[:, 0], est[:, 1] - gt[:, 1])
    heading = wrap_angles(est[:, 2] - gt[:, 2])
    reached = log.goals_reached()

    return Metrics(
        steps = len(log.records),
        goals = len(log.goals),
        reached = reached,
        success_rate = reached / len(log.goals) if log.goals else math.nan,
        rms_position_error = float(np.sqrt(np.mean(position ** 2))),
        rms_heading_error = float(np.sqrt(np.mean(heading ** 2))),
        min_clearance = float(clearance.min()),
        collision = bool(clearance.min() <= 0.0),
        total_time = log.records[-1].t,
        goal_times = tuple(g.time for g in log.goals),
        goal_lengths = tuple(g.path_length for g in log.goals),
    )
