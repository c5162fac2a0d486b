"""
====================
The simulator module
====================

Closed-loop episodes of the ego vehicle driving through a roundabout with
background traffic.

World model
===========

Every vehicle follows its designated path. Its state in the world is its
station along the path and its speed; pose and yaw rate are read off the
path. The world advances in steps of ``dt`` seconds using explicit Euler
integration of station and speed.

Background vehicles are driven by :func:`yield_baseline_policy`: IDM car
following behind whatever is ahead on their path, plus right of way at
the ring entry. A vehicle that has not yet entered stops at the start of
its entry arc while a vehicle on the ring is about to pass its merge
point, unless it is already too close to stop comfortably. Vehicles on
the ring never yield.

Planner kinds
=============

The ego vehicle is controlled by one of three planners:

- ``policy_based``: tree search with policy-based prediction of the
  background vehicles.
- ``plain``: the same search, but background vehicles are predicted to
  keep their current heading.
- ``yield_baseline``: the background vehicles' own driver.

Planned egos replan every ``decision_interval`` seconds and hold their
acceleration in between. The ego reward is evaluated once per decision
interval and logged on the last step of that interval.

"""

import collections
import logging
import math

import numpy as np
import pandas as pd
from scipy.spatial import distance

from . import dynamics, geometry, output, planner, pomdp, policy_prediction, \
        rewards, scenario
from .utils import round_sig, TWO_PI

logger = logging.getLogger(__name__)

POLICY_BASED = 'policy_based'
PLAIN = 'plain'
YIELD_BASELINE = 'yield_baseline'

PLANNER_KINDS = (POLICY_BASED, PLAIN, YIELD_BASELINE)

# Command-line names of the planner kinds
PLANNER_NAMES = collections.OrderedDict([
    ('policy', POLICY_BASED),
    ('plain', PLAIN),
    ('baseline', YIELD_BASELINE),
])

EGO_ID = 'ego'

# Ring distance upstream of a merge point within which circulating traffic has priority (m)
CONFLICT_WINDOW = 25.0

# Ring distance past a merge point that a circulating vehicle still blocks (m)
CONFLICT_CLEARANCE = 7.0

LEADER_LOOKAHEAD = 100.0

# Largest share of the comfortable deceleration a yielding driver accepts
COMFORTABLE_STOP_SHARE = 0.8

EpisodeMetrics = collections.namedtuple(
    'EpisodeMetrics',
    ['total_reward', 'travel_time', 'collision_events', 'emergency_brake_events',
     'penalty_events', 'reached_target', 'trajectory'])


class TrackedVehicle(object):
    """A vehicle bound to its path, described by station and speed.

    :param vehicle_id: Identifier used in logs and observations.
    :param path: :class:`~rbtools.geometry.PathSpec` to follow.
    :param float station: Starting station (m).
    :param float speed: Starting speed (m/s).
    :param float departure_time: Time the vehicle appears (s).
    :param idm: :class:`~rbtools.dynamics.IdmParams` of its driver.
    :param float length: Vehicle length (m).
    """

    __slots__ = ('vehicle_id', 'path', 'station', 'v', 'acceleration', 'departure_time',
                 'idm', 'length', 'total', 'stop_station', 'ring_start', 'ring_end',
                 'active', 'finished', 'committed', 'yielding')

    def __init__(self, vehicle_id, path, station, speed, departure_time, idm, length):
        self.vehicle_id = vehicle_id
        self.path = path
        self.station = float(station)
        self.v = float(speed)
        self.acceleration = 0.
        self.departure_time = departure_time
        self.idm = idm
        self.length = length
        self.total = geometry.path_length(path)
        self.stop_station = geometry.segment_bounds(path, geometry.ENTRY_ARC)[0]
        self.ring_start, self.ring_end = geometry.segment_bounds(path, geometry.RING_ARC)
        self.active = False
        self.finished = False
        self.committed = self.station >= self.stop_station
        self.yielding = False

    @property
    def position(self):
        return geometry.point_at(self.path, self.station)

    @property
    def heading(self):
        return geometry.heading_at(self.path, self.station)

    @property
    def yaw_rate(self):
        return self.v * geometry.curvature_at(self.path, self.station)

    def other_state(self):
        x, y = self.position
        return dynamics.OtherVehicleState(x, y, self.heading, self.v)

    def ego_state(self):
        x, y = self.position
        return dynamics.EgoState(x, y, self.heading, self.v, self.yaw_rate)

    def advance(self, acceleration, dt):
        """Move one Euler step along the path."""

        self.acceleration = acceleration
        self.station = min(self.station + self.v * dt, self.total)
        self.v = max(0., self.v + acceleration * dt)


def find_leader(vehicle, others, lateral_tolerance, lookahead=LEADER_LOOKAHEAD):
    """Nearest vehicle ahead on a vehicle's path.

    :returns: Tuple of (station difference, leader), or None.
    """

    best = None
    for other in others:
        station, lateral = geometry.project_to_path(vehicle.path, other.position)
        ahead = station - vehicle.station
        if abs(lateral) <= lateral_tolerance and 0 < ahead <= lookahead:
            if best is None or ahead < best[0]:
                best = (ahead, other)
    return best


def ring_conflict(vehicle, others, layout, conflict_window=CONFLICT_WINDOW,
                  clearance=CONFLICT_CLEARANCE):
    """True if a vehicle already committed to the ring will pass this vehicle's merge point.

    A committed vehicle conflicts when it is at most ``conflict_window``
    upstream of the merge point and does not leave the ring before
    reaching it, or when it passed the merge point less than
    ``clearance`` ago.
    """

    center_x, center_y = layout.center
    merge_x, merge_y = geometry.point_at(vehicle.path, vehicle.ring_start)
    merge_angle = math.atan2(merge_y - center_y, merge_x - center_x)
    circumference = TWO_PI * layout.ring_radius

    for other in others:
        if other.station < other.stop_station or other.station >= other.ring_end:
            continue

        x, y = other.position
        upstream = layout.ring_radius * (
            (merge_angle - math.atan2(y - center_y, x - center_x)) % TWO_PI)

        if upstream >= circumference - clearance:
            return True
        if upstream <= conflict_window and other.ring_end - other.station >= upstream:
            return True

    return False


def yield_baseline_policy(vehicle, others, layout, conflict_window=CONFLICT_WINDOW,
                          clearance=CONFLICT_CLEARANCE):
    """Acceleration chosen by the right-of-way driver.

    IDM towards the vehicle ahead on the path, and a stop before the
    entry arc while :func:`ring_conflict` holds. A driver that cannot
    stop comfortably when a conflict appears commits to entering. The
    vehicle's ``committed`` and ``yielding`` flags carry this decision
    from one step to the next.

    :param vehicle: The :class:`TrackedVehicle` being driven.
    :param list others: Every other :class:`TrackedVehicle` on the road.
    :param layout: :class:`~rbtools.geometry.RoundaboutLayout`
    :returns: Commanded acceleration (m/s^2).
    """

    leader = find_leader(vehicle, others, layout.lane_width / 2.)
    if leader is None:
        acceleration = dynamics.idm_acceleration(float('inf'), vehicle.v, vehicle.v,
                                                 vehicle.idm)
    else:
        gap = leader[0] - leader[1].length
        if gap > 0:
            acceleration = dynamics.idm_acceleration(gap, vehicle.v, leader[1].v,
                                                     vehicle.idm)
        else:
            acceleration = -dynamics.MAX_PHYSICAL_BRAKE

    if not vehicle.committed and vehicle.station >= vehicle.stop_station:
        vehicle.committed = True

    if vehicle.committed:
        return acceleration

    if ring_conflict(vehicle, others, layout, conflict_window, clearance):
        to_stop_line = max(vehicle.stop_station - vehicle.station, 0.01)
        stopping = dynamics.idm_acceleration(to_stop_line, vehicle.v, 0., vehicle.idm)
        comfortable = -COMFORTABLE_STOP_SHARE * vehicle.idm.comfortable_deceleration
        if vehicle.yielding or stopping >= comfortable:
            vehicle.yielding = True
            acceleration = min(acceleration, stopping)
        else:
            vehicle.committed = True
    else:
        vehicle.yielding = False

    return acceleration


def detect_collision(positions, vehicle_ids, dims=(5.0, 1.8)):
    """Pairs of vehicles whose bounding circles touch or overlap.

    :param positions: Sequence of (x, y) centers.
    :param vehicle_ids: Identifier of each position.
    :param tuple dims: (length, width) shared by all vehicles (m).
    :returns: List of (id, id) pairs, closer than two boundary radii.
    """

    if len(positions) < 2:
        return []

    threshold = 2 * rewards.boundary_radius(*dims)
    distances = distance.pdist(np.asarray(positions, dtype=float))
    rows, cols = np.triu_indices(len(positions), k=1)

    return [(vehicle_ids[i], vehicle_ids[j])
            for i, j, gap in zip(rows, cols, distances) if gap <= threshold]


def detect_emergency_brake(acceleration_traces, b_max):
    """Count emergency brakes in per-vehicle commanded acceleration traces.

    :param dict acceleration_traces: Vehicle id to the accelerations it \
            commanded on consecutive steps.
    :param float b_max: Braking magnitude that counts as an emergency.
    :returns: Number of events; consecutive braking steps of one vehicle \
            form a single event.
    """

    events = 0
    for trace in acceleration_traces.values():
        braking = False
        for acceleration in trace:
            if acceleration <= -b_max and not braking:
                events += 1
            braking = acceleration <= -b_max
    return events


class Episode(object):
    """World state and bookkeeping for one closed-loop episode.

    :param cfg: :class:`~rbtools.scenario.ScenarioConfig`
    """

    def __init__(self, cfg):
        self.cfg = cfg
        self.dt = cfg.dt
        self.n_steps = int(round(cfg.max_duration / cfg.dt))
        self.step_index = 0
        self.departure_step = int(round(cfg.ego.departure_time / cfg.dt))
        length = cfg.rewards.vehicle_length

        self.ego = TrackedVehicle(
            EGO_ID, geometry.build_roundabout_path(cfg.layout, cfg.ego.entry_arm,
                                                   cfg.ego.exit_arm),
            cfg.ego.start_station, cfg.ego.initial_speed, cfg.ego.departure_time,
            cfg.ego.idm, length)

        self.vehicles = [
            TrackedVehicle(
                spec.vehicle_id,
                geometry.build_roundabout_path(cfg.layout, spec.entry_arm, spec.exit_arm),
                spec.start_station, spec.initial_speed, spec.departure_time,
                spec.idm, length)
            for spec in cfg.vehicles]

        self.rows = []
        self.brake_traces = collections.OrderedDict(
            (vehicle.vehicle_id, []) for vehicle in self.vehicles)
        self.touching = set()
        self.collision_events = 0
        self.penalty_events = 0
        self.total_reward = 0.
        self.target_awarded = False
        self.completion_step = None
        self.done = False
        self._ego_row = None

        self._spawn()
        self._log([vehicle for vehicle in [self.ego] + self.vehicles if vehicle.active])

    @property
    def time(self):
        return self.step_index * self.dt

    def background(self):
        """Background vehicles currently on the road."""

        return [vehicle for vehicle in self.vehicles if vehicle.active]

    def _spawn(self):
        for vehicle in [self.ego] + self.vehicles:
            if not (vehicle.active or vehicle.finished) and \
                    vehicle.departure_time <= self.time + 1e-9:
                vehicle.active = True

    def _log(self, movers):
        t = round_sig(self.time)
        for vehicle in movers:
            x, y = vehicle.position
            row = [t, vehicle.vehicle_id, x, y, vehicle.heading, vehicle.v,
                   vehicle.acceleration, vehicle.yaw_rate, 0., 0., 0., 0., 0., 0.]
            self.rows.append(row)
            if vehicle is self.ego:
                self._ego_row = row

    def advance(self, ego_acceleration=None):
        """Advance the world by one step.

        :param float ego_acceleration: Acceleration applied to the ego; \
                None lets the right-of-way driver choose it.
        """

        self._spawn()
        background = self.background()
        movers = ([self.ego] if self.ego.active else []) + background

        commanded = []
        for vehicle in background:
            others = [other for other in movers if other is not vehicle]
            acceleration = yield_baseline_policy(vehicle, others, self.cfg.layout)
            self.brake_traces[vehicle.vehicle_id].append(acceleration)
            commanded.append(acceleration)

        if self.ego.active:
            if ego_acceleration is None:
                ego_acceleration = yield_baseline_policy(self.ego, background,
                                                         self.cfg.layout)
            self.ego.advance(ego_acceleration, self.dt)

        for vehicle, acceleration in zip(background, commanded):
            vehicle.advance(acceleration, self.dt)

        self.step_index += 1
        self._log(movers)
        self._check_collisions(movers)

        for vehicle in background:
            if vehicle.station >= vehicle.total:
                vehicle.active = False
                vehicle.finished = True

        if self.ego.active and rewards.target_reached(
                self.ego.ego_state(), self.ego.path, self.cfg.rewards, self.ego.station):
            self.completion_step = self.step_index
            self.done = True

        if self.step_index >= self.n_steps:
            self.done = True

    def _check_collisions(self, movers):
        dims = (self.cfg.rewards.vehicle_length, self.cfg.rewards.vehicle_width)
        pairs = set(detect_collision([vehicle.position for vehicle in movers],
                                     [vehicle.vehicle_id for vehicle in movers], dims))

        self.collision_events += len(pairs - self.touching)
        self.touching = pairs

        if any(EGO_ID in pair for pair in pairs):
            logger.info('Ego collision at t=%.1f s', self.time)
            self.done = True

    def score(self, a_x):
        """Evaluate the ego reward and attach it to the latest ego log row."""

        if not self.ego.active or self._ego_row is None:
            return None

        breakdown = rewards.total_reward(
            self.ego.ego_state(), [vehicle.other_state() for vehicle in self.background()],
            a_x, self.ego.path, self.cfg.rewards, station=self.ego.station,
            target_awarded=self.target_awarded)

        logged = [round_sig(value) for value in breakdown]
        self._ego_row[8:14] = logged
        self.total_reward += logged[-1]

        if breakdown.collision < 0:
            self.penalty_events += 1
        if breakdown.target > 0:
            self.target_awarded = True

        return breakdown

    def observe(self):
        """Raw observation of the ego and every background vehicle."""

        objects = []
        for vehicle in self.background():
            state = vehicle.other_state()
            objects.append(pomdp.ObservedObject(vehicle.vehicle_id, state.x, state.y,
                                                state.theta, state.v))
        return pomdp.Observation(self.ego.ego_state(), self.ego.station, tuple(objects))

    def metrics(self):
        """Summarize the episode as :class:`EpisodeMetrics`."""

        reached = self.completion_step is not None
        if reached:
            travel_time = round_sig(self.completion_step * self.dt)
        else:
            travel_time = self.cfg.max_duration

        return EpisodeMetrics(
            total_reward=self.total_reward,
            travel_time=travel_time,
            collision_events=self.collision_events,
            emergency_brake_events=detect_emergency_brake(self.brake_traces,
                                                          self.cfg.rewards.b_max),
            penalty_events=self.penalty_events,
            reached_target=reached,
            trajectory=pd.DataFrame(self.rows, columns=output.TRAJECTORY_COLUMNS))


class PlannerEnvironment(object):
    """Adapter letting :func:`rbtools.planner.decision_cycle` drive an :class:`Episode`."""

    def __init__(self, episode, steps_per_decision):
        self.episode = episode
        self.steps_per_decision = steps_per_decision

    def apply(self, action):
        for _ in range(self.steps_per_decision):
            self.episode.advance(action.acceleration)
            if self.episode.done:
                break
        self.episode.score(action.acceleration)
        return self.episode.observe()


def _run_baseline(episode):
    steps = scenario.steps_per_decision(episode.cfg)
    while not episode.done:
        episode.advance(None)
        since_departure = episode.step_index - episode.departure_step
        if episode.ego.active and (since_departure % steps == 0 or episode.done):
            episode.score(episode.ego.acceleration)


def _run_planner(episode, transition):
    cfg = episode.cfg
    steps = scenario.steps_per_decision(cfg)

    while not episode.done and not episode.ego.active:
        episode.advance(0.)
    if episode.done:
        return

    model = pomdp.make_model(episode.ego.path, cfg.layout, cfg.rewards, transition,
                             cfg.dt, steps)
    policy_set = policy_prediction.policy_set_for_layout(
        cfg.layout, cfg.prediction.default_policy)
    belief = pomdp.initial_belief(episode.observe(), policy_set.policies)
    history = pomdp.empty_history(belief)
    environment = PlannerEnvironment(episode, steps)

    previous_acceleration = 0.
    cycle = 0
    while not episode.done:
        seed = np.random.SeedSequence([cfg.seed, cycle])
        applied, history, belief = planner.decision_cycle(
            history, belief, environment, model, cfg.planner, cfg.prediction,
            previous_acceleration, seed)
        previous_acceleration = applied.acceleration
        cycle += 1


def run_episode(cfg, planner_kind):
    """Run one closed-loop episode.

    :param cfg: Validated :class:`~rbtools.scenario.ScenarioConfig`.
    :param str planner_kind: One of 'policy_based', 'plain' or 'yield_baseline'.
    :returns: :class:`EpisodeMetrics`
    """

    if planner_kind not in PLANNER_KINDS:
        raise ValueError('Unknown planner kind "{0}"; valid kinds are {1}'.format(
            planner_kind, ', '.join(PLANNER_KINDS)))

    logger.info('Starting %s episode of scenario %s with seed %d',
                planner_kind, cfg.name, cfg.seed)

    episode = Episode(cfg)
    if planner_kind == YIELD_BASELINE:
        _run_baseline(episode)
    elif planner_kind == PLAIN:
        _run_planner(episode, pomdp.CONSTANT_TRANSITION)
    else:
        _run_planner(episode, pomdp.POLICY_TRANSITION)

    metrics = episode.metrics()
    logger.info('Finished after %.1f s: reward %.3f, %d collisions, %d emergency brakes',
                metrics.travel_time, metrics.total_reward, metrics.collision_events,
                metrics.emergency_brake_events)

    return metrics


def run_to_directory(scenario_file, planner_name, seed, output_dir,
                     simulations=None, time_budget=None):
    """Load a scenario, run one episode and write its output files.

    :param str scenario_file: Scenario path or bundled scenario name.
    :param str planner_name: 'policy', 'plain' or 'baseline'.
    :param int seed: Seed for this run.
    :param str output_dir: Directory for trajectory, metrics and manifest.
    :returns: :class:`EpisodeMetrics`
    """

    cfg = scenario.with_overrides(scenario.load_scenario(scenario_file), seed=seed,
                                  simulations=simulations, time_budget=time_budget)
    metrics = run_episode(cfg, PLANNER_NAMES[planner_name])
    output.write_run(metrics, output_dir, scenario_file, planner_name, cfg.seed)
    return metrics


def run_from_args(args):
    """Wrapper function to run a single episode from argparse"""

    metrics = run_to_directory(args.scenario, args.planner, args.seed, args.output_dir,
                               args.simulations, args.time_budget)

    print('Total reward {0:.3f}, travel time {1:.1f} s, {2} collision(s), '
          '{3} emergency brake(s)'.format(metrics.total_reward, metrics.travel_time,
                                          metrics.collision_events,
                                          metrics.emergency_brake_events))
