"""
==================
The planner module
==================

Monte-Carlo tree search over the roundabout POMDP.

Search
======

Each simulation draws a root state from the factored belief and walks
down the tree, choosing actions with UCB1 and advancing the state with
:func:`rbtools.pomdp.generative_step`. When it reaches a node that has
never been expanded, the node gets one edge per action and the value of
the state is estimated with a uniformly random rollout. Returns are
discounted by ``discount`` per decision step and propagated back up the
visited edges as incremental means.

Transitions and observations are deterministic, so the only difference
between simulations is the driving policy sampled for each background
vehicle. Each action edge keeps one child node per distinct observation
it has produced, so the tree is indexed by histories of actions and
observations. Observations are matched by :func:`observation_key`, which
rounds poses and speeds to ``observation_resolution``.

Decision cycle
==============

:func:`decision_cycle` runs one search, limits the change in
acceleration with :func:`rbtools.rewards.clamp_jerk`, applies the result
to the environment, predicts the driving policy of every vehicle from the
new observation and updates the belief and history.

"""

import collections
import logging
import math
import warnings
from timeit import default_timer as timer

import numpy as np

from . import pomdp, policy_prediction, rewards

logger = logging.getLogger(__name__)

PlannerConfig = collections.namedtuple(
    'PlannerConfig',
    ['discount', 'exploration', 'max_depth', 'num_simulations', 'time_budget',
     'rollout_policy', 'n_init', 'v_init', 'track_returns', 'observation_resolution'])
PlannerConfig.__new__.__defaults__ = (
    0.99, 2.0, 100, 10000, None, 'uniform', 0, 0.0, False, 0.1)

ROLLOUT_POLICIES = ('uniform',)


def check_planner_config(cfg):
    """Raise a ValueError if the planner configuration is unusable."""

    if not 0 < cfg.discount < 1:
        raise ValueError('discount must lie strictly between 0 and 1')
    if cfg.exploration < 0:
        raise ValueError('exploration constant must not be negative')
    if cfg.max_depth < 1:
        raise ValueError('max_depth must be at least 1')
    if cfg.num_simulations < 0:
        raise ValueError('num_simulations must not be negative')
    if cfg.time_budget is not None and cfg.time_budget < 0:
        raise ValueError('time_budget must not be negative')
    if cfg.rollout_policy not in ROLLOUT_POLICIES:
        raise ValueError('Unknown rollout policy "{0}"'.format(cfg.rollout_policy))
    if cfg.n_init < 0:
        raise ValueError('n_init must not be negative')
    if not cfg.observation_resolution > 0:
        raise ValueError('observation_resolution must be positive')


class Edge(object):
    """Statistics of one action taken from a node."""

    __slots__ = ('visits', 'value', 'children', 'returns')

    def __init__(self, visits=0, value=0.):
        self.visits = visits
        self.value = value
        self.children = {}
        self.returns = []

    def child(self, key):
        """The node reached through this edge by observation key, created on first use."""

        node = self.children.get(key)
        if node is None:
            node = self.children[key] = SearchNode()
        return node


class SearchNode(object):
    """A node of the search tree, reached by a history of actions and observations."""

    __slots__ = ('visits', 'value', 'edges')

    def __init__(self):
        self.visits = 0
        self.value = 0.
        self.edges = None

    @property
    def expanded(self):
        return self.edges is not None

    def expand(self, n_actions, n_init=0, v_init=0.):
        self.edges = [Edge(n_init, v_init) for _ in range(n_actions)]
        self.visits += n_init * n_actions


def ucb1_select(node, c):
    """Index of the edge maximizing V(ha) + c * sqrt(ln N(h) / N(ha)).

    Unvisited edges are taken first. Ties go to the lowest index.

    :raises ValueError: If the node has no edges.
    """

    if not node.edges:
        raise ValueError('Cannot select an action from a node without children')

    for index, edge in enumerate(node.edges):
        if edge.visits == 0:
            return index

    log_visits = math.log(node.visits)
    scores = [edge.value + c * math.sqrt(log_visits / edge.visits)
              for edge in node.edges]
    return int(np.argmax(scores))


def update_node_stats(edge, value):
    """Fold a return into an edge's running mean.

    The edge's visit count must already include this visit.
    """

    if edge.visits == 0:
        raise ValueError('Edge visit count must be incremented before updating its value')

    edge.value += (value - edge.value) / edge.visits
    return edge


def rollout(state, depth, model, cfg, rng):
    """Discounted return of a uniformly random action sequence from state."""

    total = 0.
    discount = 1.
    n_actions = len(model.actions)

    while depth < cfg.max_depth and not pomdp.is_terminal(state):
        action = model.actions[rng.integers(n_actions)]
        state, _, reward = pomdp.generative_step(state, action, model)
        total += discount * reward
        discount *= cfg.discount
        depth += 1

    return total


def observation_key(observation, resolution):
    """Hashable key matching observations that agree to within resolution.

    Covers the position, heading and speed of the ego and of every object.
    """

    values = [observation.ego.x, observation.ego.y, observation.ego.theta, observation.ego.v]
    for obj in observation.objects:
        values.extend((obj.x, obj.y, obj.theta, obj.v))

    return tuple(int(cell) for cell in np.round(np.asarray(values) / resolution))


def simulate_node(state, node, depth, model, cfg, rng):
    """Run one simulation through node and return its discounted value."""

    if depth >= cfg.max_depth or pomdp.is_terminal(state):
        return 0.

    if not node.expanded:
        node.expand(len(model.actions), cfg.n_init, cfg.v_init)
        return rollout(state, depth, model, cfg, rng)

    index = ucb1_select(node, cfg.exploration)
    edge = node.edges[index]
    next_state, observation, reward = pomdp.generative_step(state, model.actions[index], model)
    child = edge.child(observation_key(observation, cfg.observation_resolution))

    value = reward + cfg.discount * simulate_node(next_state, child, depth + 1,
                                                  model, cfg, rng)

    node.visits += 1
    node.value += (value - node.value) / node.visits
    edge.visits += 1
    update_node_stats(edge, value)
    if cfg.track_returns:
        edge.returns.append(value)

    return value


def run_search(belief, model, cfg, rng_seed):
    """Grow a search tree from a belief until the budget is spent.

    The budget is ``time_budget`` seconds when set, otherwise
    ``num_simulations`` simulations.

    :returns: The root :class:`SearchNode`.
    """

    if belief is None:
        raise ValueError('Cannot search from an empty belief')

    rng = np.random.default_rng(rng_seed)
    root = SearchNode()

    if cfg.time_budget is not None:
        start = timer()
        while timer() - start < cfg.time_budget:
            simulate_node(pomdp.sample_state(belief, rng), root, 0, model, cfg, rng)
    else:
        for _ in range(cfg.num_simulations):
            simulate_node(pomdp.sample_state(belief, rng), root, 0, model, cfg, rng)

    return root


def best_action(root, actions):
    """Visited action with the highest value, lowest index on ties.

    Falls back to coasting when no edge has been visited.
    """

    if len(actions) == 1:
        return actions[0]

    candidates = [(index, edge.value) for index, edge in enumerate(root.edges or [])
                  if edge.visits > 0]
    if not candidates:
        return pomdp.coast_action(actions)

    best_value = max(value for _, value in candidates)
    for index, value in candidates:
        if value == best_value:
            return actions[index]


def search(history, belief, model, cfg, rng_seed):
    """Choose the next action for the current history and belief.

    :param history: :class:`~rbtools.pomdp.History` so far.
    :param belief: :class:`~rbtools.pomdp.FactoredBelief` to sample root \
            states from.
    :param model: :class:`~rbtools.pomdp.RoundaboutModel`
    :param cfg: :class:`PlannerConfig`
    :param rng_seed: Seed for root sampling and rollouts.
    :returns: :class:`~rbtools.pomdp.ActionCommand`
    """

    if belief is None:
        raise ValueError('Cannot search from an empty belief')

    if len(model.actions) == 1:
        return model.actions[0]

    if cfg.time_budget is None and cfg.num_simulations == 0:
        warnings.warn('Search budget is zero simulations; coasting.')
        return pomdp.coast_action(model.actions)

    root = run_search(belief, model, cfg, rng_seed)
    action = best_action(root, model.actions)

    logger.debug('Cycle %d: %d root visits, chose a=%.1f',
                 len(history.actions), root.visits, action.acceleration)

    return action


def decision_cycle(history, belief, env, model, cfg, prediction_cfg,
                   previous_acceleration, rng_seed):
    """Plan, apply and observe one decision step.

    :param history: :class:`~rbtools.pomdp.History` so far.
    :param belief: Current :class:`~rbtools.pomdp.FactoredBelief`.
    :param env: Object whose ``apply(action)`` advances the world one \
            decision step and returns the new raw observation.
    :param model: :class:`~rbtools.pomdp.RoundaboutModel`
    :param cfg: :class:`PlannerConfig`
    :param prediction_cfg: :class:`~rbtools.policy_prediction.PredictionConfig`
    :param float previous_acceleration: Acceleration applied last cycle.
    :param rng_seed: Seed for this cycle's search.
    :returns: Tuple of (applied action, new history, new belief).
    """

    chosen = search(history, belief, model, cfg, rng_seed)
    acceleration = rewards.clamp_jerk(chosen.acceleration, previous_acceleration,
                                      model.rewards.J_max)
    applied = pomdp.ActionCommand(chosen.index, acceleration)

    observation = env.apply(applied)

    extended = pomdp.append_history(history, applied, observation)
    predictions = policy_prediction.predict_all(extended, observation, model.layout,
                                                prediction_cfg)
    augmented = policy_prediction.augment_observation(observation, predictions)

    new_belief = pomdp.update_belief(belief, applied, augmented)
    new_history = pomdp.append_history(history, applied, augmented)

    return applied, new_history, new_belief
