from rbtools import dynamics, geometry, pomdp, rewards, scenario, simulator
import math
import numpy as np
import pandas as pd
from pandas.testing import assert_frame_equal
import pytest

layout = geometry.default_layout()
RADIUS = rewards.boundary_radius(5.0, 1.8)


def vehicle(entry, exit, station, speed, vehicle_id='v', idm=scenario.DEFAULT_VEHICLE_IDM):
    tracked = simulator.TrackedVehicle(
        vehicle_id, geometry.build_roundabout_path(layout, entry, exit),
        station, speed, 0., idm, 5.0)
    tracked.active = True
    return tracked

def upstream_of_south_merge(distance):
    """A west-to-east vehicle on the ring, distance metres before the south merge point."""

    west_east = vehicle(2, 0, 0., 7., 'ring')
    west_east.station = west_east.ring_start + 20 * math.pi / 2 - distance
    return west_east

def quick(name, **overrides):
    cfg = scenario.load_scenario(name)
    return scenario.with_overrides(cfg, **overrides)


#########################################
#
# simulator.detect_collision tests
#
#########################################

def test_collision_pair():
    pairs = simulator.detect_collision([(0., 0.), (6., 0.), (100., 0.)], ['a', 'b', 'c'])
    assert pairs == [('a', 'b')]

def test_collision_none():
    assert simulator.detect_collision([(0., 0.), (2 * RADIUS + 0.01, 0.)], ['a', 'b']) == []

def test_collision_single_vehicle():
    assert simulator.detect_collision([(0., 0.)], ['a']) == []

def test_collision_all_pairs():
    pairs = simulator.detect_collision([(0., 0.), (1., 0.), (0., 1.)], ['a', 'b', 'c'])
    assert sorted(pairs) == [('a', 'b'), ('a', 'c'), ('b', 'c')]

def test_collision_matches_pairwise_distances():
    rng = np.random.default_rng(3)
    positions = [tuple(p) for p in rng.uniform(-15., 15., size=(12, 2))]
    ids = ['v{0}'.format(i) for i in range(len(positions))]

    expected = [(ids[i], ids[j])
                for i in range(len(ids)) for j in range(i + 1, len(ids))
                if math.hypot(positions[i][0] - positions[j][0],
                              positions[i][1] - positions[j][1]) <= 2 * RADIUS]

    assert sorted(simulator.detect_collision(positions, ids)) == sorted(expected)

def _arm_lane_gap(lanes):
    """Closest approach of the inbound and outbound lanes of the east arm."""

    inbound = geometry.build_roundabout_path(lanes, 0, 2)
    outbound = geometry.build_roundabout_path(lanes, 2, 0)
    _, entry_end = geometry.segment_bounds(inbound, geometry.ENTRY_ARC)
    exit_start, _ = geometry.segment_bounds(outbound, geometry.EXIT_ARC)

    arriving = np.array([geometry.point_at(inbound, s)
                         for s in np.linspace(0., entry_end, 200)])
    leaving = np.array([geometry.point_at(outbound, s)
                        for s in np.linspace(exit_start, geometry.path_length(outbound), 200)])
    gaps = np.linalg.norm(arriving[:, None, :] - leaving[None, :, :], axis=2)
    return gaps.min()

def test_opposite_lanes_do_not_touch_in_multi_vehicle_layout():
    multi = scenario.load_scenario('multi_vehicle').layout
    assert _arm_lane_gap(multi) > 2 * RADIUS

def test_opposite_lanes_touch_in_default_layout():
    assert _arm_lane_gap(layout) < 2 * RADIUS


#########################################
#
# simulator.detect_emergency_brake tests
#
#########################################

def test_emergency_brake_events():
    traces = {'a': [0., -3., -3.5, 0., -3.], 'b': [-1., -2.9]}
    assert simulator.detect_emergency_brake(traces, 3.) == 2

def test_emergency_brake_none():
    assert simulator.detect_emergency_brake({'a': [], 'b': [1., 0.]}, 3.) == 0


#########################################
#
# simulator.TrackedVehicle tests
#
#########################################

def test_tracked_vehicle_advance():
    tracked = vehicle(3, 1, 0., 5.)
    tracked.advance(1., 0.1)
    assert tracked.station == pytest.approx(0.5)
    assert tracked.v == pytest.approx(5.1)
    assert tracked.position == pytest.approx((2., -59.5))

def test_tracked_vehicle_stops_at_path_end():
    tracked = vehicle(3, 1, 0., 5.)
    tracked.station = tracked.total - 0.1
    tracked.advance(0., 0.1)
    assert tracked.station == tracked.total

def test_tracked_vehicle_never_reverses():
    tracked = vehicle(3, 1, 0., 0.2)
    tracked.advance(-9., 0.1)
    assert tracked.v == 0.

def test_tracked_vehicle_yaw_rate():
    tracked = vehicle(3, 1, 0., 6.)
    tracked.station = (tracked.ring_start + tracked.ring_end) / 2
    assert tracked.yaw_rate == pytest.approx(0.3)
    assert tracked.ego_state().w == pytest.approx(0.3)


#########################################
#
# simulator right of way tests
#
#########################################

def test_ring_conflict_upstream():
    entering = vehicle(3, 1, 10., 5.)
    assert simulator.ring_conflict(entering, [upstream_of_south_merge(10.)], layout)

def test_ring_conflict_far_upstream():
    entering = vehicle(3, 1, 10., 5.)
    assert not simulator.ring_conflict(entering, [upstream_of_south_merge(30.)], layout)

def test_ring_conflict_just_passed():
    entering = vehicle(3, 1, 10., 5.)
    assert simulator.ring_conflict(entering, [upstream_of_south_merge(-3.)], layout)

def test_ring_conflict_long_gone():
    entering = vehicle(3, 1, 10., 5.)
    assert not simulator.ring_conflict(entering, [upstream_of_south_merge(-15.)], layout)

def test_ring_conflict_ignores_waiting_vehicles():
    entering = vehicle(3, 1, 10., 5.)
    waiting = vehicle(2, 0, 20., 0.)
    assert not simulator.ring_conflict(entering, [waiting], layout)

def test_free_road_acceleration():
    driver = vehicle(3, 1, 0., 5.)
    acceleration = simulator.yield_baseline_policy(driver, [], layout)
    assert acceleration == pytest.approx(
        dynamics.idm_acceleration(float('inf'), 5., 5., driver.idm))
    assert not driver.committed

def test_yields_to_ring_traffic():
    driver = vehicle(3, 1, 0., 5.)
    driver.station = driver.stop_station - 20.
    free = dynamics.idm_acceleration(float('inf'), 5., 5., driver.idm)

    acceleration = simulator.yield_baseline_policy(driver, [upstream_of_south_merge(10.)],
                                                   layout)
    assert driver.yielding
    assert not driver.committed
    assert acceleration < free

def test_commits_when_too_close_to_stop():
    driver = vehicle(3, 1, 0., 7.)
    driver.station = driver.stop_station - 1.
    simulator.yield_baseline_policy(driver, [upstream_of_south_merge(10.)], layout)
    assert driver.committed
    assert not driver.yielding

def test_committed_past_stop_line():
    driver = vehicle(3, 1, 0., 5.)
    driver.station = driver.stop_station + 0.5
    simulator.yield_baseline_policy(driver, [upstream_of_south_merge(10.)], layout)
    assert driver.committed

def test_follows_leader():
    driver = vehicle(3, 1, 0., 7.)
    leader = vehicle(3, 1, 12., 0., 'leader')
    acceleration = simulator.yield_baseline_policy(driver, [leader], layout)
    assert acceleration == pytest.approx(
        dynamics.idm_acceleration(12. - 5., 7., 0., driver.idm))

def test_overlapping_leader_brakes_hard():
    driver = vehicle(3, 1, 0., 7.)
    leader = vehicle(3, 1, 3., 0., 'leader')
    assert simulator.yield_baseline_policy(driver, [leader], layout) == \
        -dynamics.MAX_PHYSICAL_BRAKE

def test_find_leader_ignores_opposite_lane():
    driver = vehicle(3, 1, 0., 7.)
    oncoming = vehicle(1, 3, 100., 7.)
    assert simulator.find_leader(driver, [oncoming], layout.lane_width / 2.) is None


#########################################
#
# simulator.Episode tests
#
#########################################

def test_episode_starts_with_logged_state():
    episode = simulator.Episode(quick('two_vehicle'))
    assert len(episode.rows) == 2
    assert [row[1] for row in episode.rows] == ['ego', 'v1']
    assert episode.rows[0][0] == 0.

def test_episode_time_limit():
    cfg = quick('ego_only')._replace(max_duration=2.0)
    metrics = simulator.run_episode(cfg, simulator.YIELD_BASELINE)
    assert not metrics.reached_target
    assert metrics.travel_time == 2.0
    assert metrics.trajectory.t.max() == pytest.approx(2.0)

def test_episode_observation():
    episode = simulator.Episode(quick('two_vehicle'))
    observation = episode.observe()
    assert observation.ego_station == 0.
    assert [obj.object_id for obj in observation.objects] == ['v1']
    assert observation.objects[0].policy is None

def test_late_departure():
    cfg = quick('ego_only')
    cfg = cfg._replace(vehicles=(scenario.VehicleSpec('late', 0, 2, departure_time=1.0),))
    episode = simulator.Episode(cfg)
    assert episode.background() == []
    for _ in range(11):
        episode.advance(0.)
    assert [v.vehicle_id for v in episode.background()] == ['late']

def test_planner_environment_advances_one_decision():
    episode = simulator.Episode(quick('ego_only'))
    environment = simulator.PlannerEnvironment(episode, 10)
    observation = environment.apply(pomdp.ActionCommand(3, 0.))
    assert episode.step_index == 10
    assert observation.ego_station == pytest.approx(5.)
    assert episode.rows[-1][8:14] != [0.] * 6


#########################################
#
# simulator.run_episode tests
#
#########################################

def test_baseline_ego_only():
    metrics = simulator.run_episode(quick('ego_only'), simulator.YIELD_BASELINE)
    trajectory = metrics.trajectory
    print(metrics.travel_time, metrics.total_reward)

    assert metrics.reached_target
    assert metrics.collision_events == 0
    assert metrics.emergency_brake_events == 0
    assert metrics.travel_time == pytest.approx(trajectory.t.max())
    assert set(trajectory.vehicle_id) == {'ego'}
    assert (trajectory.r_target == 1000.).sum() == 1
    assert metrics.total_reward == pytest.approx(trajectory.r_total.sum(), rel=1e-12)

def test_travel_time_counts_from_episode_start():
    cfg = quick('ego_only')
    late = cfg._replace(ego=cfg.ego._replace(departure_time=2.0))
    on_time = simulator.run_episode(cfg, simulator.YIELD_BASELINE)
    metrics = simulator.run_episode(late, simulator.YIELD_BASELINE)

    assert metrics.reached_target
    assert metrics.travel_time == pytest.approx(metrics.trajectory.t.max())
    assert metrics.travel_time == pytest.approx(on_time.travel_time + 2.0)

def test_baseline_two_vehicles_log_is_consistent():
    cfg = quick('two_vehicle')
    metrics = simulator.run_episode(cfg, simulator.YIELD_BASELINE)
    trajectory = metrics.trajectory

    assert metrics.total_reward == pytest.approx(trajectory.r_total.sum(), abs=1e-9)
    assert (trajectory.v >= 0).all()
    assert ((trajectory.theta >= 0) & (trajectory.theta < 2 * math.pi)).all()

    spec = cfg.vehicles[0]
    path = geometry.build_roundabout_path(cfg.layout, spec.entry_arm, spec.exit_arm)
    background = trajectory[trajectory.vehicle_id == spec.vehicle_id]
    offsets = [abs(geometry.project_to_path(path, (x, y))[1])
               for x, y in zip(background.x, background.y)]
    assert max(offsets) <= 0.5

def test_baseline_rewards_once_per_decision():
    trajectory = simulator.run_episode(quick('ego_only'), simulator.YIELD_BASELINE).trajectory
    scored = trajectory[trajectory.r_total != 0]
    steps = (scored.t * 10).round().astype(int)
    assert all(step % 10 == 0 for step in steps.iloc[:-1])

def test_baseline_two_vehicles_logs_background():
    metrics = simulator.run_episode(quick('two_vehicle'), simulator.YIELD_BASELINE)
    assert set(metrics.trajectory.vehicle_id) == {'ego', 'v1'}
    assert metrics.collision_events == 0

def test_planner_respects_jerk_limit():
    metrics = simulator.run_episode(quick('ego_only', simulations=20), simulator.POLICY_BASED)
    applied = metrics.trajectory[metrics.trajectory.vehicle_id == 'ego'].a_applied
    changes = applied.diff().abs().dropna()
    assert changes.max() <= 1.0 + 1e-9

def test_planner_is_deterministic():
    cfg = quick('two_vehicle', simulations=15)
    first = simulator.run_episode(cfg._replace(max_duration=5.0), simulator.POLICY_BASED)
    second = simulator.run_episode(cfg._replace(max_duration=5.0), simulator.POLICY_BASED)
    assert_frame_equal(first.trajectory, second.trajectory)
    assert first.total_reward == second.total_reward

def test_plain_planner_runs():
    cfg = quick('two_vehicle', simulations=15)._replace(max_duration=3.0)
    metrics = simulator.run_episode(cfg, simulator.PLAIN)
    assert len(metrics.trajectory) > 0
    assert isinstance(metrics.trajectory, pd.DataFrame)

def test_unknown_planner_kind():
    with pytest.raises(ValueError) as error:
        simulator.run_episode(quick('ego_only'), 'teleport')
    assert 'yield_baseline' in str(error.value)
