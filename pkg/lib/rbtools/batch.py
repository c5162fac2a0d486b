"""
================
The batch module
================

The batch module handles the :doc:`/tools/batch` command.

A batch runs one episode for every combination of planner and seed, then
collects the metrics of all runs into a single summary table. The runs
are expressed as doit_ tasks, with wrapit_ passing the command-line
arguments through to them. Every run writes into its own subdirectory,
so runs can execute in parallel (``--num-process``), and finished runs
are skipped when a batch is repeated.

:class:`BatchTasks` saves the input parameters and uses them to create
tasks. The task methods named in :attr:`BatchTasks.task_order` are passed
to doit in that order, episodes first and the summary last.

.. _doit: http://pydoit.org/
.. _wrapit: https://github.com/kpj/wrapit

"""

import argparse
import json
import logging
import os

import pandas as pd
from wrapit.api import run

from . import output, scenario, simulator

logger = logging.getLogger(__name__)

RUN_TASK = 'Running episode'
SUMMARY_TASK = 'Summarizing runs'


def parse_planner_list(planner_string):
    """Turn "policy,plain,baseline" into a list of planner names.

    :raises argparse.ArgumentTypeError: If a name is not a known planner.
    """

    planners = [name.strip() for name in planner_string.split(',') if name.strip()]
    unknown = [name for name in planners if name not in simulator.PLANNER_NAMES]

    if unknown or not planners:
        raise argparse.ArgumentTypeError(
            'Invalid planner list "{0}" (choose from: {1})'.format(
                planner_string, ', '.join(simulator.PLANNER_NAMES)))

    return planners


def run_directory(output_root, planner_name, seed):
    """Subdirectory holding the output of one run of a batch."""

    return os.path.join(output_root, '{0}_seed{1}'.format(planner_name, seed))


def run_episode_task(scenario_file, planner_name, seed, output_dir,
                     simulations, time_budget):
    """doit action running one episode of a batch."""

    simulator.run_to_directory(scenario_file, planner_name, seed, output_dir,
                               simulations, time_budget)


def summary_row(metrics_path):
    """One summary table row read from a metrics.json file."""

    with open(metrics_path) as metrics_file:
        metrics = json.load(metrics_file)

    return {
        'planner': metrics['planner'],
        'seed': metrics['seed'],
        'total_reward': metrics['total_reward'],
        'travel_time': metrics['travel_time'],
        'collisions': metrics['collision_events'],
        'emergency_brakes': metrics['emergency_brake_events'],
        'reached_target': metrics['reached_target'],
        'penalty_events': metrics['penalty_events'],
    }


def write_summary(metrics_paths, summary_path):
    """Collect the metrics of every run into the summary table.

    :param list metrics_paths: metrics.json file of each run, in row order.
    :param str summary_path: Path of the summary CSV to write.
    """

    summary = pd.DataFrame([summary_row(path) for path in metrics_paths],
                           columns=output.SUMMARY_COLUMNS)
    output.write_table(summary, summary_path)

    logger.info('Wrote summary of %d runs to %s', len(summary), summary_path)


def write_batch_manifest(scenario_file, planners, seeds, output_root, artifacts):
    """Write the manifest marking a batch as complete."""

    manifest = output.RunManifest(scenario_file, ','.join(planners), tuple(seeds),
                                  output_root,
                                  tuple(artifacts) + (output.MANIFEST_FILE,))
    output.write_manifest(manifest)


class BatchTasks(object):
    """Class for generating doit tasks from command-line arguments.

    The "batch" command generates one task per (planner, seed) pair at
    runtime, plus a task summarizing them. Tasks need access to the
    argparse arguments at runtime, so they are generated via a class,
    such that args is always accessible via self.args.

    :param args: An argparse Namespace object containing parameters \
            passed via the command line
    """

    task_order = ('task_run_episode', 'task_summarize')

    def __init__(self, args):
        self.args = args

    def create_doit_tasks(self):
        """Generator function that yields doit tasks.

        A task method either returns one task dictionary or yields several.
        """

        for method_name in self.task_order:
            produced = getattr(self, method_name)()
            if isinstance(produced, dict):
                yield produced
            else:
                yield from produced

    def runs(self):
        """(planner, seed, directory) for every run, planners outermost."""

        for planner_name in self.args.planners:
            for seed in self.args.seeds:
                yield planner_name, seed, run_directory(self.args.output_dir,
                                                        planner_name, seed)

    def task_run_episode(self):
        """Task to run one episode per planner and seed."""

        scenario_file = scenario.scenario_path(self.args.scenario)

        for planner_name, seed, run_dir in self.runs():
            yield {
                'name': '{0}_seed{1}'.format(planner_name, seed),
                'basename': RUN_TASK,
                'actions': [(run_episode_task, (
                    self.args.scenario, planner_name, seed, run_dir,
                    self.args.simulations, self.args.time_budget))],
                'targets': [os.path.join(run_dir, output.TRAJECTORY_FILE),
                            os.path.join(run_dir, output.METRICS_FILE),
                            os.path.join(run_dir, output.MANIFEST_FILE)],
                'file_dep': [scenario_file],
            }

    def task_summarize(self):
        """Task to collect every run's metrics into summary.csv."""

        metrics_paths = [os.path.join(run_dir, output.METRICS_FILE)
                         for _, _, run_dir in self.runs()]
        summary_path = os.path.join(self.args.output_dir, output.SUMMARY_FILE)
        artifacts = [os.path.relpath(path, self.args.output_dir) for path in metrics_paths]

        return {
            'basename': SUMMARY_TASK,
            'actions': [(output.ensure_directory, (self.args.output_dir,)),
                        (write_summary, (metrics_paths, summary_path)),
                        (write_batch_manifest, (
                            self.args.scenario, self.args.planners, self.args.seeds,
                            self.args.output_dir,
                            [output.SUMMARY_FILE] + artifacts))],
            'targets': [summary_path,
                        os.path.join(self.args.output_dir, output.MANIFEST_FILE)],
            'file_dep': metrics_paths,
        }


def batch_from_args(args):
    """Wrapper function to call doit from argparse"""

    # Fail on a bad scenario before any task starts
    scenario.load_scenario(args.scenario)

    task_dict = {
        'batch_tasks': BatchTasks(args)
    }
    run(task_dict, args, [SUMMARY_TASK])
