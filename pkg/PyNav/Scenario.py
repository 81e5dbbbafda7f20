'''
A scenario is everything one run needs: the world, the vehicle, the sensors,
the algorithm parameters, the mission and the seed. It is read from an INI
file through Config, so any option the file leaves out takes its default.

    [world]
    bounds = 0 0 10 10
    obstacle.1 = 6 6  8 6  8 7  6 7

    [vehicle]
    start = 1 1 0

    [mission]
    mapping = 0.5 0 4; 0.5 0.4 2
    goals = 8 2 0; 2 8 1.57

Mapping commands are "v phi duration" triples and goals "x y theta"
triples, both separated by ";". Angles are radians.
'''

import math
from dataclasses import dataclass, field

from PyNav.Config import Config
from PyNav.Errors import ConfigurationError
from PyNav.Geometry import DriveCommand, Pose2D
from PyNav.Lidar import BeamNoiseParams, LidarConfig
from PyNav.Vehicle import VehicleParams
from PyNav.World import WorldModel


@dataclass(frozen = True)
class TimedCommand:
    command: DriveCommand
    duration: float


@dataclass(frozen = True, eq = False)
class Scenario:
    config: Config
    world: WorldModel
    vehicle: VehicleParams
    start: Pose2D
    lidar: LidarConfig
    noise: BeamNoiseParams
    imu_noise: tuple
    mapping: tuple = field(default_factory = tuple)
    goals: tuple = field(default_factory = tuple)
    seed: int = 0

    @staticmethod
    def load(filename):
        return Scenario.from_config(Config.load(filename))

    @staticmethod
    def from_config(config):
        obstacles = []
        for name, value in config.options('world', 'obstacle'):
            if not isinstance(value, list) or len(value) % 2:
                raise ConfigurationError('%s must be a flat list of x y pairs' % name)
            obstacles.append([value[i:i + 2] for i in range(0, len(value), 2)])
        world = WorldModel(config.get('world', 'bounds'), obstacles)

        vehicle = VehicleParams(
            config.get('vehicle', 'wheelbase'),
            config.get('vehicle', 'max_speed'),
            config.get('vehicle', 'max_accel'),
            config.get('vehicle', 'max_steer'),
            config.get('vehicle', 'inscribed_radius'),
            config.get('vehicle', 'circumscribed_radius'),
        )
        start = _pose(config.get('vehicle', 'start'), 'vehicle.start')
        if not world.in_bounds(start.x, start.y) or world.inside_obstacle(start.x, start.y):
            raise ConfigurationError('Start pose (%.3f, %.3f) is not in free space' % (start.x, start.y))
        if world.clearance(start.x, start.y) <= vehicle.footprint_radius_circumscribed:
            raise ConfigurationError('Start pose (%.3f, %.3f) collides with the world' % (start.x, start.y))

        lidar = LidarConfig(
            int(config.get('lidar', 'beam_count')),
            config.get('lidar', 'fov'),
            config.get('lidar', 'z_max'),
            config.get('lidar', 'angular_offset'),
        )
        noise = BeamNoiseParams(
            config.get('lidar', 'z_hit'),
            config.get('lidar', 'z_short'),
            config.get('lidar', 'z_max_w'),
            config.get('lidar', 'z_rand'),
            config.get('lidar', 'sigma_hit'),
            config.get('lidar', 'lambda_short'),
        )
        imu_noise = (config.get('imu', 'yaw_rate_std'), config.get('imu', 'accel_std'))

        return Scenario(
            config, world, vehicle, start, lidar, noise, imu_noise,
            parse_commands(config.get('mission', 'mapping')),
            parse_goals(config.get('mission', 'goals')),
            int(config.get('run', 'seed')),
        )

    def with_seed(self, seed):
        return Scenario.from_config(self.config.with_option('run', 'seed', int(seed)))

    def control_period(self):
        return 1.0 / self.config.get('run', 'control_rate')


def _pose(values, name):
    if not isinstance(values, list) or len(values) != 3:
        raise ConfigurationError('%s must be "x y theta"' % name)
    if not all(math.isfinite(value) for value in values):
        raise ConfigurationError('%s must be finite' % name)
    return Pose2D(*values)


def _triples(text, name):
    triples = []
    for chunk in str(text or '').split(';'):
        if not chunk.strip():
            continue
        try:
            values = [float(part) for part in chunk.replace(',', ' ').split()]
        except ValueError:
            raise ConfigurationError('Malformed %s entry %r' % (name, chunk.strip()))
        if len(values) != 3:
            raise ConfigurationError('%s entries need three numbers, got %r' % (name, chunk.strip()))
        triples.append(values)
    return triples


def parse_commands(text):
    commands = []
    for v, phi, duration in _triples(text, 'mapping'):
        if not duration > 0:
            raise ConfigurationError('Mapping command durations must be positive')
        commands.append(TimedCommand(DriveCommand(v, phi), duration))
    return tuple(commands)


def parse_goals(text):
    return tuple(_pose(values, 'goal') for values in _triples(text, 'goals'))
