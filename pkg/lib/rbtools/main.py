"""
===============
The main module
===============

The `main` module creates the argument parser used by the rbtools command
line application, and the :func:`main` function which handles dispatching
command line arguments to the correct functions.

"""

# more or less everything in this module is in the global scope, so pylint
# thinks objects are constants that should be in capital letters
# pylint: disable=invalid-name

import argparse
import logging
import os
import sys

from wrapit.parser import add_doit_options
import pytest

from . import batch, forward_sim, geometry, scenario, simulator
from .utils import parse_seed_range

OUTPUT_ROOT_VARIABLE = 'RBTOOLS_OUTPUT_ROOT'
DEFAULT_OUTPUT_ROOT = 'rbtools_output'


parser = argparse.ArgumentParser(
    prog='rbtools',
    description='rbtools plans and simulates an autonomous vehicle driving '
    'through a roundabout with background traffic.')

parser.add_argument(
    '-v', '--verbose', action='store_true',
    help='Log progress and planner decisions')

subparsers = parser.add_subparsers(help='Please select a command:')
subparsers.required = True
subparsers.dest = 'command'


def add_output_option(subparser, what):
    subparser.add_argument(
        '-o', '--out', dest='output_dir', metavar='OUTPUT_DIRECTORY',
        help='Write {0} to this directory (default: ${1} or ./{2})'.format(
            what, OUTPUT_ROOT_VARIABLE, DEFAULT_OUTPUT_ROOT))


def add_budget_options(subparser):
    subparser.add_argument(
        '-n', '--simulations', type=int, metavar='NUM_SIMULATIONS',
        help='Planner simulations per decision (overrides the scenario file)')
    subparser.add_argument(
        '-t', '--time-budget', type=float, metavar='SECONDS',
        help='Planner time per decision, instead of a fixed number of simulations')


# Options for the 'run' command

run_parser = subparsers.add_parser(
    'run',
    help='Run a single episode')

run_parser.add_argument(
    '-s', '--scenario', required=True,
    help='Scenario file, or the name of a bundled scenario')

run_parser.add_argument(
    '-p', '--planner', default='policy',
    choices=simulator.PLANNER_NAMES,
    help='Planner controlling the ego vehicle (choose from: {})'.format(
        ', '.join(simulator.PLANNER_NAMES)))

run_parser.add_argument(
    '--seed', type=int,
    help='Random seed (overrides the scenario file)')

add_output_option(run_parser, 'trajectory.csv, metrics.json and manifest.json')
add_budget_options(run_parser)

run_parser.set_defaults(func=simulator.run_from_args)

# Options for the 'batch' command

batch_parser = subparsers.add_parser(
    'batch',
    help='Run one episode per planner and seed and summarize the results')

batch_parser.add_argument(
    '-s', '--scenario', required=True,
    help='Scenario file, or the name of a bundled scenario')

batch_parser.add_argument(
    '-p', '--planners', default=list(simulator.PLANNER_NAMES),
    type=batch.parse_planner_list, metavar='PLANNER[,PLANNER...]',
    help='Comma separated planners to compare (default: all of {})'.format(
        ', '.join(simulator.PLANNER_NAMES)))

batch_parser.add_argument(
    '--seeds', default=[0], type=parse_seed_range, metavar='SEEDS',
    help='Seeds to run, e.g. "7", "1,3,5" or "0..19"')

add_output_option(batch_parser, 'one directory per run and summary.csv')
add_budget_options(batch_parser)

add_doit_options(batch_parser,
                 ['dep_file', 'backend', 'verbosity',
                  'reporter', 'num_process', 'par_type'])

batch_parser.set_defaults(func=batch.batch_from_args)

# Options for the 'forward_sim' command

forward_parser = subparsers.add_parser(
    'forward_sim',
    help='Compare constant-velocity and policy-based motion prediction')

forward_parser.add_argument(
    '--entry-arm', type=int, default=forward_sim.ForwardSimConfig().entry_arm,
    help='Arm the vehicle enters from (default: south)')
forward_parser.add_argument(
    '--exit-arm', type=int, default=forward_sim.ForwardSimConfig().exit_arm,
    help='Arm the vehicle leaves by (default: north)')
forward_parser.add_argument(
    '--speed', type=float, default=forward_sim.ForwardSimConfig().speed,
    help='Constant vehicle speed in m/s')
forward_parser.add_argument(
    '--dt', type=float, default=forward_sim.ForwardSimConfig().dt,
    help='Integration step in seconds')
forward_parser.add_argument(
    '--steps', type=int, default=forward_sim.ForwardSimConfig().steps,
    help='Number of steps to simulate')
forward_parser.add_argument(
    '--lead', type=float, default=forward_sim.ForwardSimConfig().lead,
    help='Distance before the entry arc at which the vehicle starts (m)')

add_output_option(forward_parser, 'the three trajectory tables')

forward_parser.set_defaults(func=forward_sim.forward_sim_from_args)


def get_scenario(scenario_name):
    """Get the absolute path to a file in the rbtools 'scenarios' folder

    :param str scenario_name: Name of the file.
    :returns: Absolute path to the file
    """

    return os.path.join(scenario.SCENARIO_DIRECTORY, scenario_name)


# Options for 'test' command

test_parser = subparsers.add_parser(
    'test',
    help='Test that rbtools is installed and configured correctly.')


test_directory = os.path.join(os.path.dirname(__file__), 'tests')

def test_function(args): #pylint: disable=unused-argument
    """Wrapper function to call py.test from arparse"""

    test_args = sys.argv[2:]
    sys.exit(pytest.main([test_directory, '-m', 'not acceptance'] + test_args))

test_parser.set_defaults(func=test_function)


def default_output_dir():
    """Output directory used when none is given on the command line."""

    return os.environ.get(OUTPUT_ROOT_VARIABLE, DEFAULT_OUTPUT_ROOT)


def main():
    """Main rbtools function that is called by the rbtools command line script."""

    args = parser.parse_args()

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(asctime)s %(name)s %(levelname)s: %(message)s')

    if hasattr(args, 'output_dir') and args.output_dir is None:
        args.output_dir = default_output_dir()

    try:
        args.func(args)
    except (scenario.ScenarioError, geometry.LayoutError, OSError) as err:
        sys.exit('rbtools {0}: {1}'.format(args.command, err))


if __name__ == '__main__':
    main()
