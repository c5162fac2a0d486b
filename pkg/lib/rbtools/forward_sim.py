"""
======================
The forward_sim module
======================

The forward_sim module handles the :doc:`/tools/forward_sim` command.

A single vehicle drives its designated path at constant speed, starting
a short distance before its entry arc. Its motion is predicted from the
initial pose with both background-vehicle models in
:mod:`rbtools.dynamics`:

- the constant-velocity model, which keeps the initial heading and
  drifts off the path as soon as the path bends;
- the policy-based model, which switches driving policy with the region
  under the vehicle and stays close to the path.

The command writes three tables, each holding the initial state and one
row per step: ``ground_truth.csv`` (the path itself),
``constant_model.csv`` and ``policy_model.csv``. Each row carries the
distance of the predicted position from the path as ``lateral_error``.

The policy model changes policy once per step, so each region boundary
adds an error that grows with the distance covered in a step. At the
default 2 m/s the rollout stays within half a metre of the path; at 4 m/s
it reaches about 0.6 m and near the ring's desired speed of 6 m/s it can
exceed 1.5 m.

"""

import collections
import os
import warnings

import pandas as pd

from . import dynamics, geometry, output

FORWARD_COLUMNS = ['step', 't', 'x', 'y', 'theta', 'v', 'lateral_error']

GROUND_TRUTH_FILE = 'ground_truth.csv'
CONSTANT_MODEL_FILE = 'constant_model.csv'
POLICY_MODEL_FILE = 'policy_model.csv'

# Speed (m/s) up to which the policy rollout stays within half a metre of the path
TRACKING_SPEED = 2.0

ForwardSimConfig = collections.namedtuple(
    'ForwardSimConfig', ['entry_arm', 'exit_arm', 'speed', 'dt', 'steps', 'lead'])
ForwardSimConfig.__new__.__defaults__ = (3, 1, TRACKING_SPEED, 0.1, 100, 2.0)


def start_station(path, lead):
    """Station lead metres before the path's entry arc (never negative)."""

    return max(geometry.segment_bounds(path, geometry.ENTRY_ARC)[0] - lead, 0.)


def ground_truth_trajectory(path, station, v, dt, n):
    """States of a vehicle driving exactly along a path at constant speed."""

    total = geometry.path_length(path)
    trajectory = []

    for step in range(n + 1):
        s = min(station + step * v * dt, total)
        x, y = geometry.point_at(path, s)
        trajectory.append(dynamics.OtherVehicleState(x, y, geometry.heading_at(path, s), v))

    return trajectory


def constant_trajectory(initial, dt, n):
    """Constant-velocity rollout from an initial state."""

    trajectory = [initial]
    for _ in range(n):
        trajectory.append(dynamics.step_constant(trajectory[-1], dt))
    return trajectory


def trajectory_table(trajectory, path, dt):
    """Tabulate a trajectory with each position's distance from the path."""

    rows = []
    for step, state in enumerate(trajectory):
        _, lateral = geometry.project_to_path(path, (state.x, state.y))
        rows.append([step, step * dt, state.x, state.y, state.theta, state.v, abs(lateral)])

    return pd.DataFrame(rows, columns=FORWARD_COLUMNS)


def forward_simulate(layout, cfg=ForwardSimConfig()):
    """Ground truth and both model rollouts for one vehicle.

    :param layout: :class:`~rbtools.geometry.RoundaboutLayout`
    :param cfg: :class:`ForwardSimConfig`
    :returns: OrderedDict mapping output file name to trajectory table.
    """

    if cfg.steps < 1:
        raise ValueError('At least one step must be simulated')
    if not cfg.dt > 0 or not cfg.speed > 0:
        raise ValueError('dt and speed must be positive')
    if cfg.speed > TRACKING_SPEED:
        warnings.warn('Policy rollout error grows with speed; above {0} m/s it can '
                      'exceed half a metre'.format(TRACKING_SPEED))

    path = geometry.build_roundabout_path(layout, cfg.entry_arm, cfg.exit_arm)
    station = start_station(path, cfg.lead)

    truth = ground_truth_trajectory(path, station, cfg.speed, cfg.dt, cfg.steps)
    initial = truth[0]

    policies = dynamics.path_policy_sequence(path, layout, station, cfg.speed,
                                             cfg.dt, cfg.steps)

    return collections.OrderedDict([
        (GROUND_TRUTH_FILE, trajectory_table(truth, path, cfg.dt)),
        (CONSTANT_MODEL_FILE, trajectory_table(
            constant_trajectory(initial, cfg.dt, cfg.steps), path, cfg.dt)),
        (POLICY_MODEL_FILE, trajectory_table(
            dynamics.simulate_path_follow(initial, policies, cfg.dt, cfg.steps),
            path, cfg.dt)),
    ])


def write_forward_sim(tables, output_dir):
    """Write the trajectory tables and their manifest."""

    output.ensure_directory(output_dir)

    for file_name, table in tables.items():
        output.write_table(table, os.path.join(output_dir, file_name))

    manifest = output.RunManifest('default_layout', 'forward_sim', (), output_dir,
                                  tuple(tables) + (output.MANIFEST_FILE,))
    output.write_manifest(manifest)
    return manifest


def forward_sim_from_args(args):
    """Wrapper function to run the forward simulation from argparse"""

    cfg = ForwardSimConfig(args.entry_arm, args.exit_arm, args.speed, args.dt,
                           args.steps, args.lead)
    tables = forward_simulate(geometry.default_layout(), cfg)
    write_forward_sim(tables, args.output_dir)

    for file_name, table in tables.items():
        print('{0}: max lateral error {1:.3f} m'.format(
            file_name, table.lateral_error.max()))
