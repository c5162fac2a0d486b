"""
===================
The scenario module
===================

Scenario files describe everything needed to run an episode: the
roundabout layout, the ego vehicle, the background traffic and the
reward, planner and prediction settings.

Scenario files are JSON documents with a schema tag::

    {
        "schema": "rbtools-scenario/1",
        "name": "two_vehicle",
        "seed": 0,
        "max_duration": 60.0,
        "ego": {"entry_arm": 3, "exit_arm": 1, "initial_speed": 5.0},
        "vehicles": [
            {"vehicle_id": "v1", "entry_arm": 2, "exit_arm": 0,
             "initial_speed": 7.0, "start_station": 36.0,
             "idm": {"desired_speed": 7.0}}
        ],
        "planner": {"num_simulations": 300, "max_depth": 15}
    }

Every section except ``ego`` is optional and every missing key takes its
default. Unknown keys are rejected. All quantities are SI units and
angles are radians.

"""

import collections
import json
import os

from . import dynamics, geometry, planner, policy_prediction, rewards

SCHEMA_TAG = 'rbtools-scenario/1'

SCENARIO_DIRECTORY = os.path.join(os.path.dirname(__file__), 'data', 'scenarios')


class ScenarioError(ValueError):
    """Exception raised when a scenario file cannot be loaded or is invalid."""
    pass


DEFAULT_EGO_IDM = dynamics.IdmParams(desired_speed=6.0)
DEFAULT_VEHICLE_IDM = dynamics.IdmParams(desired_speed=7.0)

EgoSpec = collections.namedtuple(
    'EgoSpec',
    ['entry_arm', 'exit_arm', 'initial_speed', 'departure_time', 'start_station', 'idm'])
EgoSpec.__new__.__defaults__ = (3, 1, 5.0, 0.0, 0.0, DEFAULT_EGO_IDM)

VehicleSpec = collections.namedtuple(
    'VehicleSpec',
    ['vehicle_id', 'entry_arm', 'exit_arm', 'departure_time', 'initial_speed',
     'start_station', 'idm'])
VehicleSpec.__new__.__defaults__ = (0.0, 7.0, 0.0, DEFAULT_VEHICLE_IDM)

ScenarioConfig = collections.namedtuple(
    'ScenarioConfig',
    ['name', 'layout', 'ego', 'vehicles', 'rewards', 'planner', 'prediction',
     'seed', 'max_duration', 'dt', 'decision_interval'])
ScenarioConfig.__new__.__defaults__ = (
    'scenario', geometry.RoundaboutLayout(), EgoSpec(), (),
    rewards.RewardConfig(), planner.PlannerConfig(),
    policy_prediction.PredictionConfig(), 0, 60.0, 0.1, 1.0)

TOP_LEVEL_KEYS = ('schema',) + ScenarioConfig._fields


def scenario_path(name):
    """Resolve a scenario argument to a file path.

    Existing paths are returned unchanged; otherwise the name is looked
    up among the bundled scenarios, with or without the ``.json`` suffix.
    """

    if os.path.exists(name):
        return name

    for candidate in (name, name + '.json'):
        bundled = os.path.join(SCENARIO_DIRECTORY, candidate)
        if os.path.exists(bundled):
            return bundled

    raise ScenarioError('Scenario "{0}" not found'.format(name))


def _build(record_type, data, section):
    """Construct a namedtuple from a mapping, rejecting unknown keys."""

    if not isinstance(data, dict):
        raise ScenarioError('Section "{0}" must be a JSON object'.format(section))

    unknown = sorted(set(data) - set(record_type._fields))
    if unknown:
        raise ScenarioError('Unknown key(s) in section "{0}": {1}'.format(
            section, ', '.join(unknown)))

    try:
        return record_type(**data)
    except TypeError as err:
        raise ScenarioError('Section "{0}" is incomplete: {1}'.format(section, err))


def _build_layout(data):
    layout = _build(geometry.RoundaboutLayout, data, 'layout')
    return layout._replace(
        center=tuple(float(c) for c in layout.center),
        arms=tuple((float(heading), float(length)) for heading, length in layout.arms))


def _build_idm(data, default, section):
    if data is None:
        return default
    return _build(dynamics.IdmParams, dict(default._asdict(), **data), section)


def scenario_from_dict(data):
    """Build a :class:`ScenarioConfig` from parsed JSON.

    :raises ScenarioError: If the schema tag is wrong, a key is unknown \
            or the result fails :func:`validate_scenario`.
    """

    if not isinstance(data, dict):
        raise ScenarioError('A scenario must be a JSON object')
    if data.get('schema') != SCHEMA_TAG:
        raise ScenarioError('Expected schema "{0}" but found "{1}"'.format(
            SCHEMA_TAG, data.get('schema')))

    unknown = sorted(set(data) - set(TOP_LEVEL_KEYS))
    if unknown:
        raise ScenarioError('Unknown top-level key(s): {0}'.format(', '.join(unknown)))
    if 'ego' not in data:
        raise ScenarioError('A scenario must describe the ego vehicle')

    ego_data = dict(data['ego'])
    ego_idm = _build_idm(ego_data.pop('idm', None), DEFAULT_EGO_IDM, 'ego.idm')
    ego = _build(EgoSpec, dict(ego_data, idm=ego_idm), 'ego')

    vehicles = []
    for index, vehicle_data in enumerate(data.get('vehicles', [])):
        vehicle_data = dict(vehicle_data)
        section = 'vehicles[{0}]'.format(index)
        idm = _build_idm(vehicle_data.pop('idm', None),
                         DEFAULT_VEHICLE_IDM, section + '.idm')
        vehicle_data.setdefault('vehicle_id', 'v{0}'.format(index + 1))
        vehicles.append(_build(VehicleSpec, dict(vehicle_data, idm=idm), section))

    cfg = ScenarioConfig(
        name=data.get('name', 'scenario'),
        layout=_build_layout(data.get('layout', {})),
        ego=ego,
        vehicles=tuple(vehicles),
        rewards=_build(rewards.RewardConfig, data.get('rewards', {}), 'rewards'),
        planner=_build(planner.PlannerConfig, data.get('planner', {}), 'planner'),
        prediction=_build(policy_prediction.PredictionConfig,
                          data.get('prediction', {}), 'prediction'),
        seed=int(data.get('seed', 0)),
        max_duration=float(data.get('max_duration', 60.0)),
        dt=float(data.get('dt', 0.1)),
        decision_interval=float(data.get('decision_interval', 1.0)))

    validate_scenario(cfg)
    return cfg


def load_scenario(path):
    """Read and validate a scenario file.

    :param str path: Path to the JSON scenario, or the name of a bundled one.
    :returns: :class:`ScenarioConfig`
    :raises ScenarioError: If the file is missing, is not JSON or is invalid.
    """

    path = scenario_path(path)

    try:
        with open(path) as scenario_file:
            data = json.load(scenario_file)
    except ValueError as err:
        raise ScenarioError('Could not parse {0}: {1}'.format(path, err))

    return scenario_from_dict(data)


def steps_per_decision(cfg):
    """Number of integration steps in one decision interval."""

    return int(round(cfg.decision_interval / cfg.dt))


def validate_scenario(cfg):
    """Check a :class:`ScenarioConfig` and everything it contains.

    :raises ScenarioError: Describing the first problem found.
    """

    try:
        geometry.validate_layout(cfg.layout)
        rewards.check_reward_config(cfg.rewards)
        planner.check_planner_config(cfg.planner)
        policy_prediction.check_prediction_config(cfg.prediction)

        if not cfg.max_duration > 0:
            raise ValueError('max_duration must be positive')
        if not cfg.dt > 0:
            raise ValueError('dt must be positive')
        if steps_per_decision(cfg) < 1 or abs(
                steps_per_decision(cfg) * cfg.dt - cfg.decision_interval) > 1e-9:
            raise ValueError('decision_interval must be a whole number of steps')
        if abs(cfg.prediction.observation_interval - cfg.decision_interval) > 1e-9:
            raise ValueError('prediction.observation_interval must equal decision_interval')

        specs = [('ego', cfg.ego)] + [(v.vehicle_id, v) for v in cfg.vehicles]
        seen = set()
        for name, spec in specs:
            if name in seen:
                raise ValueError('Vehicle id "{0}" is used twice'.format(name))
            seen.add(name)
            if spec.departure_time < 0:
                raise ValueError('Vehicle {0} departs before the episode starts'.format(name))
            if spec.initial_speed < 0:
                raise ValueError('Vehicle {0} has a negative initial speed'.format(name))
            dynamics.check_idm_params(spec.idm)
            path = geometry.build_roundabout_path(cfg.layout, spec.entry_arm, spec.exit_arm)
            if not 0 <= spec.start_station < geometry.path_length(path):
                raise ValueError('Vehicle {0} starts off its path'.format(name))

    except ValueError as err:
        if isinstance(err, ScenarioError):
            raise
        raise ScenarioError(str(err))


def with_overrides(cfg, seed=None, simulations=None, time_budget=None):
    """Copy of a scenario with command-line overrides applied."""

    planner_cfg = cfg.planner
    if simulations is not None:
        planner_cfg = planner_cfg._replace(num_simulations=simulations, time_budget=None)
    if time_budget is not None:
        planner_cfg = planner_cfg._replace(time_budget=time_budget)

    cfg = cfg._replace(planner=planner_cfg)
    if seed is not None:
        cfg = cfg._replace(seed=seed)

    validate_scenario(cfg)
    return cfg
