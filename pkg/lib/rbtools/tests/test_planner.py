from rbtools import dynamics, geometry, planner, pomdp, policy_prediction, rewards
import math
import numpy as np
import pytest
try:
    from unittest.mock import patch
except ImportError:
    from mock import patch

layout = geometry.default_layout()
policies = policy_prediction.policy_set_for_layout(layout).policies
road = geometry.straight_path((0., 0.), 0., 200.)
road_model = pomdp.make_model(road, layout, rewards.RewardConfig())

TARGET = rewards.RewardConfig().target_reward_value
# Worst reward of one decision step in these searches: collision, a
# 90 m gap error, speeding and discomfort all at once
RETURN_FLOOR = -1000. - 900. - 300. - 100.


def road_belief(v=5.):
    ego = dynamics.EgoState(0., 0., 0., v, 0.)
    return pomdp.initial_belief(pomdp.Observation(ego, 0., ()), policies)

def ring_belief():
    path = geometry.build_roundabout_path(layout, 3, 1)
    ego = dynamics.EgoState(2., -60., math.pi / 2, 5., 0.)
    obj = pomdp.ObservedObject('v1', 20., 0., math.pi / 2, 6.)
    belief = pomdp.initial_belief(pomdp.Observation(ego, 0., (obj,)), policies)
    return belief, pomdp.make_model(path, layout, rewards.RewardConfig())

def brute_force_first_values(state, model, horizon, discount):
    """Optimal discounted value after each first action, by enumeration."""

    def best(state, remaining):
        if remaining == 0 or pomdp.is_terminal(state):
            return 0.
        values = []
        for action in model.actions:
            next_state, _, reward = pomdp.generative_step(state, action, model)
            values.append(reward + discount * best(next_state, remaining - 1))
        return max(values)

    first_values = []
    for action in model.actions:
        next_state, _, reward = pomdp.generative_step(state, action, model)
        first_values.append(reward + discount * best(next_state, horizon - 1))
    return first_values

def walk(node):
    yield node
    for edge in node.edges or []:
        for child in edge.children.values():
            for descendant in walk(child):
                yield descendant


#########################################
#
# planner.ucb1_select tests
#
#########################################

def node_with(stats):
    node = planner.SearchNode()
    node.expand(len(stats))
    for edge, (visits, value) in zip(node.edges, stats):
        edge.visits, edge.value = visits, value
    node.visits = sum(visits for visits, _ in stats)
    return node

def test_unvisited_edge_first():
    node = node_with([(5, 10.), (0, 0.), (3, 1.)])
    assert planner.ucb1_select(node, 2.) == 1

def test_highest_score():
    node = node_with([(10, 1.), (10, 3.), (10, 2.)])
    assert planner.ucb1_select(node, 2.) == 1

def test_exploration_bonus():
    # Rarely tried edges win once the bonus outweighs the value gap
    node = node_with([(100, 1.), (1, 0.)])
    assert planner.ucb1_select(node, 0.) == 0
    assert planner.ucb1_select(node, 2.) == 1

def test_tie_goes_to_lowest_index():
    node = node_with([(4, 2.), (4, 2.), (4, 2.)])
    assert planner.ucb1_select(node, 1.) == 0

def test_select_without_children():
    with pytest.raises(ValueError):
        planner.ucb1_select(planner.SearchNode(), 1.)


#########################################
#
# planner.update_node_stats tests
#
#########################################

def test_incremental_mean():
    edge = planner.Edge()
    for count, value in enumerate([3., 5., 10.], 1):
        edge.visits = count
        planner.update_node_stats(edge, value)
    assert edge.value == pytest.approx(6.)

def test_update_before_visit():
    with pytest.raises(ValueError):
        planner.update_node_stats(planner.Edge(), 1.)

def test_expand_with_prior_counts():
    node = planner.SearchNode()
    node.expand(7, n_init=2, v_init=-5.)
    assert node.visits == 14
    assert all(edge.visits == 2 and edge.value == -5. for edge in node.edges)


#########################################
#
# planner tree invariant tests
#
#########################################

def test_tree_invariants_random_searches():
    belief, model = ring_belief()
    rng = np.random.default_rng(11)

    for trial in range(50):
        cfg = planner.PlannerConfig(
            exploration=rng.uniform(0.5, 5.), max_depth=int(rng.integers(2, 4)),
            num_simulations=int(rng.integers(10, 30)), track_returns=True)
        root = planner.run_search(belief, model, cfg, trial)

        for node in walk(root):
            if not node.expanded:
                continue
            assert node.visits == sum(edge.visits for edge in node.edges)
            for edge in node.edges:
                assert len(edge.returns) == edge.visits
                for value in edge.returns:
                    assert RETURN_FLOOR * cfg.max_depth <= value <= TARGET
                if edge.visits:
                    assert edge.value == pytest.approx(np.mean(edge.returns), abs=1e-9)

def test_tree_branches_on_observations():
    belief, model = ring_belief()
    cfg = planner.PlannerConfig(max_depth=3, num_simulations=200)
    root = planner.run_search(belief, model, cfg, 0)

    # Each sampled policy moves the ring vehicle somewhere else
    assert max(len(edge.children) for edge in root.edges) == len(policies)
    for edge in root.edges:
        assert len(edge.children) <= len(policies)

def test_tree_without_objects_does_not_branch():
    cfg = planner.PlannerConfig(max_depth=3, num_simulations=100)
    root = planner.run_search(road_belief(), road_model, cfg, 0)
    for node in walk(root):
        for edge in node.edges or []:
            assert len(edge.children) <= 1

def test_observation_key_resolution():
    ego = dynamics.EgoState(1.04, 2., 0.5, 5., 0.)
    near = pomdp.ObservedObject('v1', 20.01, 0., 1.5, 6.)
    far = pomdp.ObservedObject('v1', 20.4, 0., 1.5, 6.)
    key = planner.observation_key(pomdp.Observation(ego, 0., (near,)), 0.1)
    assert key == planner.observation_key(
        pomdp.Observation(ego._replace(x=1.02), 0., (near._replace(x=19.99),)), 0.1)
    assert key != planner.observation_key(pomdp.Observation(ego, 0., (far,)), 0.1)
    assert key != planner.observation_key(pomdp.Observation(ego, 0., ()), 0.1)

def test_search_is_deterministic():
    belief, model = ring_belief()
    cfg = planner.PlannerConfig(max_depth=3, num_simulations=40)
    first = planner.run_search(belief, model, cfg, 5)
    second = planner.run_search(belief, model, cfg, 5)
    assert [(e.visits, e.value) for e in first.edges] == \
        [(e.visits, e.value) for e in second.edges]

def test_root_visits_follow_budget():
    cfg = planner.PlannerConfig(max_depth=3, num_simulations=50)
    root = planner.run_search(road_belief(), road_model, cfg, 0)
    # The first simulation only expands the root
    assert root.visits == 49

def test_time_budget():
    cfg = planner.PlannerConfig(max_depth=2, time_budget=0.05)
    root = planner.run_search(road_belief(), road_model, cfg, 0)
    assert root.visits > 0


#########################################
#
# planner.search tests
#
#########################################

def test_search_near_optimal():
    horizon = 2
    cfg = planner.PlannerConfig(max_depth=horizon, num_simulations=1000)
    belief = road_belief()
    values = brute_force_first_values(pomdp.sample_state(belief, 0), road_model,
                                      horizon, cfg.discount)
    optimum = max(values)
    print(values)

    for seed in range(5):
        history = pomdp.empty_history(belief)
        action = planner.search(history, belief, road_model, cfg, seed)
        assert abs(values[action.index] - optimum) <= 0.01 * abs(optimum)

def test_more_simulations_never_hurt():
    horizon = 2
    belief = road_belief()
    values = brute_force_first_values(pomdp.sample_state(belief, 0), road_model,
                                      horizon, 0.99)
    tolerance = 0.01 * abs(max(values))

    medians = []
    for budget in (250, 500, 1000):
        cfg = planner.PlannerConfig(max_depth=horizon, num_simulations=budget)
        chosen = [values[planner.search(pomdp.empty_history(belief), belief,
                                        road_model, cfg, seed).index]
                  for seed in range(20)]
        medians.append(np.median(chosen))

    print(medians)
    for smaller, larger in zip(medians, medians[1:]):
        assert larger >= smaller - tolerance

def test_zero_budget_coasts():
    cfg = planner.PlannerConfig(num_simulations=0)
    with pytest.warns(UserWarning):
        action = planner.search(pomdp.empty_history(road_belief()), road_belief(),
                                road_model, cfg, 0)
    assert action.acceleration == 0.

def test_single_action():
    model = pomdp.make_model(road, layout, rewards.RewardConfig(), accelerations=(1.5,))
    cfg = planner.PlannerConfig(num_simulations=10)
    action = planner.search(pomdp.empty_history(road_belief()), road_belief(), model, cfg, 0)
    assert action.acceleration == 1.5

def test_search_without_belief():
    with pytest.raises(ValueError):
        planner.search(None, None, road_model, planner.PlannerConfig(), 0)

def test_best_action_unvisited_root():
    assert planner.best_action(planner.SearchNode(), road_model.actions).acceleration == 0.

def test_check_planner_config():
    planner.check_planner_config(planner.PlannerConfig())
    with pytest.raises(ValueError):
        planner.check_planner_config(planner.PlannerConfig(discount=1.))
    with pytest.raises(ValueError):
        planner.check_planner_config(planner.PlannerConfig(rollout_policy='greedy'))
    with pytest.raises(ValueError):
        planner.check_planner_config(planner.PlannerConfig(observation_resolution=0.))


#########################################
#
# planner.decision_cycle tests
#
#########################################

class RecordingEnvironment(object):

    def __init__(self, observation):
        self.observation = observation
        self.applied = []

    def apply(self, action):
        self.applied.append(action)
        return self.observation

def test_decision_cycle_limits_jerk():
    belief = road_belief()
    observation = pomdp.Observation(dynamics.EgoState(6., 0., 0., 6., 0.), 6., ())
    env = RecordingEnvironment(observation)
    cfg = planner.PlannerConfig(max_depth=2, num_simulations=200)

    best = pomdp.action_set()[-1]
    with patch('rbtools.planner.search', return_value=best):
        applied, history, new_belief = planner.decision_cycle(
            pomdp.empty_history(belief), belief, env, road_model, cfg,
            policy_prediction.PredictionConfig(), 0., 0)

    assert applied.acceleration == pytest.approx(1.0)
    assert applied.index == best.index
    assert env.applied == [applied]
    assert history.actions == (applied,)
    assert new_belief.ego == observation.ego

def test_decision_cycle_predicts_policies():
    belief, model = ring_belief()
    obj = pomdp.ObservedObject('v1', 20., 0., math.pi / 2, 6.)
    observation = pomdp.Observation(belief.ego, 0., (obj,))
    env = RecordingEnvironment(observation)
    cfg = planner.PlannerConfig(max_depth=2, num_simulations=20)

    _, history, new_belief = planner.decision_cycle(
        pomdp.empty_history(belief), belief, env, model, cfg,
        policy_prediction.PredictionConfig(), 0., 0)

    # Too few observations for a prediction: the default policy is attached
    assert history.observations[-1].objects[0].policy.kind == dynamics.STRAIGHT
    assert new_belief.objects[0].probabilities[0] > 1 / 3.
