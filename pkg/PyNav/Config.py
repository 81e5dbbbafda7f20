'''
Parameter defaults and scenario overrides.

A scenario file is an INI file whose sections mirror the DEFAULTS below.
Anything a scenario leaves out falls back to DEFAULTS; anything DEFAULTS
does not know about comes back as None, just like an unknown layout option.
'''

import configparser
import importlib
import math

from PyNav.Errors import ConfigurationError


class Config:
    DEFAULTS = {
        'world': {
            'bounds': [0.0, 0.0, 10.0, 10.0],
        },
        'vehicle': {
            'wheelbase': 0.3,
            'max_speed': 1.0,
            'max_accel': 2.0,
            'max_steer': 0.5,
            'inscribed_radius': 0.15,
            'circumscribed_radius': 0.25,
            'start': [1.0, 1.0, 0.0],
        },
        'lidar': {
            'beam_count': 360,
            'fov': 2.0 * math.pi,
            'z_max': 8.0,
            'angular_offset': 0.0,
            'z_hit': 0.9,
            'z_short': 0.03,
            'z_max_w': 0.02,
            'z_rand': 0.05,
            'sigma_hit': 0.02,
            'lambda_short': 0.5,
        },
        'imu': {
            'yaw_rate_std': 0.01,
            'accel_std': 0.05,
        },
        'slam': {
            'resolution': 0.05,
            'margin': 1.0,
            'max_iterations': 30,
            'max_step': 0.5,
            'scan_every': 1,
        },
        'mcl': {
            'sensor_model': 'LikelihoodField',
            'init': 'tracking',
            'init_particles': 1000,
            'init_spread': [0.1, 0.1, 0.05],
            'a1': 0.02,
            'a2': 0.01,
            'a3': 0.02,
            'a4': 0.01,
            'sigma': 0.2,
            'z_hit': 0.9,
            'z_rand': 0.1,
            'z_max_w': 0.0,
            'alpha_slow': 0.001,
            'alpha_fast': 0.1,
            'epsilon': 0.05,
            'delta': 0.01,
            'bin_size': [0.25, 0.25, math.radians(10.0)],
            'n_min': 100,
            'n_max': 5000,
            'beam_stride': 4,
            'update_min_d': 0.1,
            'update_min_a': 0.2,
        },
        'costmap': {
            'inflation_radius': 0.6,
            'decay_weight': 5.0,
        },
        'planner': {
            'cost_scale': 3.0,
        },
        'teb': {
            'weight_time': 1.0,
            'weight_obstacle': 50.0,
            'weight_velocity': 10.0,
            'weight_acceleration': 1.0,
            'weight_kinematics': 100.0,
            'weight_turning_radius': 10.0,
            'min_obstacle_dist': 0.3,
            'max_vel': 0.6,
            'max_accel': 0.5,
            'min_turn_radius': 0.5,
            'ref_resolution': 0.25,
            'max_iters': 10,
            'horizon': 3.0,
            'obstacle_radius': 3.0,
            'penalty_epsilon': 0.1,
        },
        'controller': {
            'kp_linear': 1.0,
            'ki_linear': 0.0,
            'kd_linear': 0.0,
            'kp_angular': 2.0,
            'ki_angular': 0.1,
            'kd_angular': 0.0,
            'integral_limit': 1.0,
            'max_omega': 2.0,
        },
        'ekf': {
            'process_noise': [0.001, 0.001, 0.001, 0.5, 0.5],
            'initial_cov': [0.01, 0.01, 0.01, 0.1, 0.1],
            'r_twist': [0.0025, 0.0025],
            'r_yaw_rate': 0.0004,
            'r_pose': [0.01, 0.01, 0.005],
            'max_pose_rejections': 5,
        },
        'run': {
            'control_rate': 20.0,
            'teb_replan_every': 5,
            'goal_tol_xy': 0.2,
            'goal_tol_theta': math.radians(10.0),
            'goal_timeout': 60.0,
            'lookahead': 0.3,
            'seed': 0,
        },
        'mission': {
            'mapping': '',
            'goals': '',
        },
    }

    # Special flag to enable/disable the debug log file
    DEBUG = False

    # Overrides are a dict of section -> option -> parsed value, usually
    # straight out of Config.load.
    def __init__(self, overrides = None):
        self.SECTIONS = overrides or {}

    # User override first, then DEFAULTS, then nothing.
    def get(self, section, option):
        if section in self.SECTIONS and option in self.SECTIONS[section]:
            return self.SECTIONS[section][option]

        if section in Config.DEFAULTS and option in Config.DEFAULTS[section]:
            return Config.DEFAULTS[section][option]

        return None

    # All options of a section whose names start with prefix, in file order.
    # Used for numbered entries like obstacle.1, obstacle.2, ...
    def options(self, section, prefix):
        if section not in self.SECTIONS:
            return []
        return [
            (name, value) for name, value in self.SECTIONS[section].items()
            if name.startswith(prefix)
        ]

    # A copy of this config with one option replaced. Handy for tests and
    # for the CLI --seed flag.
    def with_option(self, section, option, value):
        sections = {name: dict(opts) for name, opts in self.SECTIONS.items()}
        sections.setdefault(section, {})[option] = value
        return Config(sections)

    # Reads an INI scenario. Mission entries stay raw strings; everything
    # else goes through parse_value.
    @staticmethod
    def load(filename):
        parser = configparser.ConfigParser(interpolation = None)
        parser.optionxform = str
        try:
            with open(filename, 'r') as handle:
                parser.read_file(handle)
        except OSError as err:
            raise ConfigurationError('Could not read scenario %s: %s' % (filename, err))
        except configparser.Error as err:
            raise ConfigurationError('Malformed scenario %s: %s' % (filename, err))

        sections = {}
        for section in parser.sections():
            sections[section] = {}
            for option, text in parser.items(section):
                if section == 'mission':
                    sections[section][option] = text.strip()
                else:
                    sections[section][option] = Config.parse_value(text)

        return Config(sections)

    # int, then float, then a list of floats, else the stripped string.
    @staticmethod
    def parse_value(text):
        text = text.strip()
        for cast in (int, float):
            try:
                return cast(text)
            except ValueError:
                pass

        parts = text.replace(',', ' ').split()
        if len(parts) > 1:
            try:
                return [float(part) for part in parts]
            except ValueError:
                pass

        if text.lower() in ('true', 'yes', 'on'):
            return True
        if text.lower() in ('false', 'no', 'off'):
            return False

        return text

    # Sensor models are pluggable: each module in PyNav.SensorModels exposes
    # a CLASS attribute.
    @staticmethod
    def sensor_model(name):
        try:
            module = importlib.import_module('PyNav.SensorModels.' + name)
        except ImportError:
            raise ConfigurationError('Unknown sensor model %s' % name)

        if not hasattr(module, 'CLASS'):
            raise ConfigurationError('Sensor model %s does not export CLASS' % name)

        return module.CLASS
