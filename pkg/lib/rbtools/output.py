"""
=================
The output module
=================

Writers for the files produced by ``rbtools run``, ``rbtools batch`` and
``rbtools forward_sim``.

Every run directory holds the tables and JSON documents of one run plus a
``manifest.json`` that lists them. The manifest is always written last,
so a directory with a manifest is a complete run.

Tables are written with pandas using nine significant digits, which
makes repeated runs with the same seed byte-identical.

"""

import collections
import json
import os

from .utils import FLOAT_FORMAT

TRAJECTORY_COLUMNS = ['t', 'vehicle_id', 'x', 'y', 'theta', 'v', 'a_applied', 'w',
                      'r_collision', 'r_gap', 'r_velocity', 'r_target', 'r_comfort',
                      'r_total']

SUMMARY_COLUMNS = ['planner', 'seed', 'total_reward', 'travel_time', 'collisions',
                   'emergency_brakes', 'reached_target', 'penalty_events']

TRAJECTORY_FILE = 'trajectory.csv'
METRICS_FILE = 'metrics.json'
MANIFEST_FILE = 'manifest.json'
SUMMARY_FILE = 'summary.csv'

RunManifest = collections.namedtuple(
    'RunManifest', ['scenario', 'planner', 'seeds', 'output_dir', 'artifacts'])


def ensure_directory(path):
    """Create a directory (and parents) if it does not exist yet."""

    if not os.path.isdir(path):
        os.makedirs(path)
    return path


def write_table(data_frame, path):
    """Write a table with the fixed decimal formatting."""

    data_frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def write_json(document, path):
    """Write a JSON document with sorted keys."""

    with open(path, 'w') as json_file:
        json.dump(document, json_file, indent=2, sort_keys=True)
        json_file.write('\n')
    return path


def metrics_document(metrics, planner_name, seed, scenario_file):
    """The contents of metrics.json for one episode."""

    return {
        'scenario': scenario_file,
        'planner': planner_name,
        'seed': seed,
        'total_reward': metrics.total_reward,
        'travel_time': metrics.travel_time,
        'collision_events': metrics.collision_events,
        'emergency_brake_events': metrics.emergency_brake_events,
        'penalty_events': metrics.penalty_events,
        'reached_target': metrics.reached_target,
    }


def write_manifest(manifest):
    """Write manifest.json into the manifest's output directory."""

    document = dict(manifest._asdict())
    document['artifacts'] = list(manifest.artifacts)
    document['seeds'] = list(manifest.seeds)
    return write_json(document, os.path.join(manifest.output_dir, MANIFEST_FILE))


def write_run(metrics, output_dir, scenario_file, planner_name, seed):
    """Write the trajectory, metrics and manifest of one episode.

    :param metrics: :class:`~rbtools.simulator.EpisodeMetrics`
    :param str output_dir: Directory to write into; created if needed.
    :returns: The :class:`RunManifest` that was written.
    """

    ensure_directory(output_dir)

    write_table(metrics.trajectory[TRAJECTORY_COLUMNS],
                os.path.join(output_dir, TRAJECTORY_FILE))
    write_json(metrics_document(metrics, planner_name, seed, scenario_file),
               os.path.join(output_dir, METRICS_FILE))

    manifest = RunManifest(scenario_file, planner_name, (seed,), output_dir,
                           (TRAJECTORY_FILE, METRICS_FILE, MANIFEST_FILE))
    write_manifest(manifest)

    return manifest
