'''
Command line entry point:

    pynav map      --scenario F --out M [--seed N] [--render DIR]
    pynav navigate --scenario F --map M --out LOG [--seed N] [--render DIR]
    pynav run      --scenario F --map M --out LOG [--seed N] [--render DIR]
    pynav metrics  --log LOG

Exits 0 when everything succeeded, 2 when a goal was not reached and 1 on
any error.
'''

import argparse
import os
import sys

from PyNav.Config import Config
from PyNav.Debug import DEBUG
from PyNav.Errors import NavError
from PyNav.Pipeline import run_mapping, run_navigation
from PyNav.RunLog import RunLog, compute_metrics
from PyNav.Scenario import Scenario

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED_GOALS = 2


def parser():
    root = argparse.ArgumentParser(prog = 'pynav', description = 'Simulated 2D navigation: map, localize, plan and drive.')
    root.add_argument('-v', '--verbose', action = 'store_true', help = 'log progress to stderr')
    root.add_argument('--debug', metavar = 'FILE', help = 'append the full debug log to FILE')
    commands = root.add_subparsers(dest = 'command', required = True)

    def common(sub):
        sub.add_argument('--scenario', required = True, help = 'scenario INI file')
        sub.add_argument('--seed', type = int, help = 'override the scenario seed')
        sub.add_argument('--render', metavar = 'DIR', help = 'write SVG frames to DIR')
        sub.add_argument('--every', type = int, default = 10, metavar = 'N', help = 'render one frame every N steps (default 10)')

    mapping = commands.add_parser('map', help = 'drive the mapping script and write the map')
    common(mapping)
    mapping.add_argument('--out', required = True, help = 'map file to write')

    for name, text in (('navigate', 'visit the goals on an existing map'), ('run', 'map, then navigate')):
        sub = commands.add_parser(name, help = text)
        common(sub)
        sub.add_argument('--map', required = True, help = 'map file (written first by run)')
        sub.add_argument('--out', required = True, help = 'run log CSV to write')

    metrics = commands.add_parser('metrics', help = 'summarize a run log')
    metrics.add_argument('--log', required = True, help = 'run log CSV')

    return root


def _scenario(args):
    scenario = Scenario.load(args.scenario)
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    return scenario


def _render_dir(args, suffix):
    if args.render is None:
        return None
    return os.path.join(args.render, suffix)


def _navigate(args, scenario):
    log = run_navigation(scenario, args.map, args.out, _render_dir(args, 'navigation'), args.every)
    failed = log.failed_goals()
    for goal in failed:
        print('goal (%.3f, %.3f, %.3f) failed: %s' % (goal.goal.x, goal.goal.y, goal.goal.theta, goal.reason))
    print('%d of %d goals reached' % (log.goals_reached(), len(log.goals)))
    return EXIT_FAILED_GOALS if failed else EXIT_OK


def dispatch(args):
    if args.command == 'metrics':
        for line in compute_metrics(RunLog.read(args.log)).lines():
            print(line)
        return EXIT_OK

    scenario = _scenario(args)

    if args.command in ('map', 'run'):
        out = args.out if args.command == 'map' else args.map
        result = run_mapping(scenario, out, _render_dir(args, 'mapping'), args.every)
        print('map written to %s (%d scans, %d skipped)' % (out, len(result.trajectory), result.skipped))
        if args.command == 'map':
            return EXIT_OK

    return _navigate(args, scenario)


def main(argv = None):
    args = parser().parse_args(argv)

    if args.verbose:
        DEBUG.verbose()
    if args.debug:
        Config.DEBUG = True
        DEBUG.enable(args.debug)

    try:
        return dispatch(args)
    except (NavError, OSError) as err:
        print('pynav: %s' % err, file = sys.stderr)
        return EXIT_ERROR
