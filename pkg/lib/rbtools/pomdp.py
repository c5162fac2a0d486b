"""
================
The pomdp module
================

The pomdp module holds the object-oriented POMDP that the planner solves.

States, observations and histories
==================================

A :class:`JointState` is the ego vehicle plus one
:class:`AugmentedOtherState` per background vehicle. Every background
vehicle is an object of the "vehicle" class and carries its pose, speed
and current driving policy. Transitions and observations are both
deterministic, so an :class:`Observation` reports exactly the pose and
speed of each object. The driving policy is not observed directly; it is
predicted from the history by :mod:`rbtools.policy_prediction` and
attached to the observation afterwards.

A :class:`History` is the initial belief followed by the actions taken
and the observations received, one pair per decision cycle.

Factored belief
===============

Because pose and speed are observed exactly, the only uncertainty left
is each object's driving policy. :class:`FactoredBelief` therefore keeps
a point mass on the observed pose of every object and a categorical
distribution over its policy. The joint belief is the product of these
per-object marginals and :func:`update_belief` updates each one on its
own. :func:`update_object_belief` and :func:`update_joint_belief` are the
general discrete versions of the per-object and joint updates.

"""

import collections
import functools

import numpy as np

from . import dynamics, geometry, rewards
from .utils import TWO_PI

# Linear accelerations the planner can choose from (m/s^2)
ACCELERATIONS = (-3.0, -2.0, -1.0, 0.0, 0.5, 1.5, 2.5)

POLICY_TRANSITION = 'policy'
CONSTANT_TRANSITION = 'constant'

# Probability that an object keeps its driving policy between two decisions
DEFAULT_POLICY_PERSISTENCE = 0.8

# Likelihood of the predicted policy label under the matching policy
DEFAULT_LABEL_MATCH = 0.9

MAX_CARDINALITY = 2 ** 63 - 1


class BeliefUpdateError(ValueError):
    """Exception raised when an observation has zero likelihood under the belief."""
    pass


ActionCommand = collections.namedtuple('ActionCommand', ['index', 'acceleration'])

AugmentedOtherState = collections.namedtuple('AugmentedOtherState', ['base', 'policy'])

JointState = collections.namedtuple(
    'JointState', ['ego', 'object_ids', 'others', 'ego_station', 'target_reached'])

ObservedObject = collections.namedtuple(
    'ObservedObject', ['object_id', 'x', 'y', 'theta', 'v', 'policy'])
ObservedObject.__new__.__defaults__ = (None,)

Observation = collections.namedtuple('Observation', ['ego', 'ego_station', 'objects'])

History = collections.namedtuple('History', ['initial_belief', 'actions', 'observations'])

ObjectBelief = collections.namedtuple(
    'ObjectBelief', ['object_id', 'state', 'policies', 'probabilities'])

FactoredBelief = collections.namedtuple(
    'FactoredBelief', ['ego', 'ego_station', 'objects', 'policies'])

ObjectClassSchema = collections.namedtuple('ObjectClassSchema', ['classes', 'attributes'])

EGO_CLASS = 'ego'
VEHICLE_CLASS = 'vehicle'

DEFAULT_SCHEMA = ObjectClassSchema(
    classes=(EGO_CLASS, VEHICLE_CLASS),
    attributes={
        EGO_CLASS: ('x', 'y', 'theta', 'v', 'w'),
        VEHICLE_CLASS: ('x', 'y', 'theta', 'v', 'policy'),
    })

RoundaboutModel = collections.namedtuple(
    'RoundaboutModel',
    ['path', 'layout', 'rewards', 'transition', 'dt', 'substeps', 'actions'])


def action_set(accelerations=ACCELERATIONS):
    """The discrete actions, indexed in the order given."""

    return tuple(ActionCommand(index, float(acc))
                 for index, acc in enumerate(accelerations))


def coast_action(actions):
    """The zero-acceleration action, or the first action if there is none."""

    for action in actions:
        if action.acceleration == 0:
            return action
    return actions[0]


def make_model(path, layout, reward_config, transition=POLICY_TRANSITION,
               dt=0.1, substeps=10, accelerations=ACCELERATIONS):
    """Bundle everything the generative model needs into a :class:`RoundaboutModel`.

    :param path: Ego :class:`~rbtools.geometry.PathSpec`.
    :param layout: :class:`~rbtools.geometry.RoundaboutLayout`
    :param reward_config: :class:`~rbtools.rewards.RewardConfig`
    :param str transition: 'policy' to move objects with their driving \
            policy, 'constant' to keep their heading fixed.
    :param float dt: Integration step (s).
    :param int substeps: Integration steps per decision.
    """

    if transition not in (POLICY_TRANSITION, CONSTANT_TRANSITION):
        raise ValueError('Unknown transition model "{0}"'.format(transition))

    return RoundaboutModel(path, layout, reward_config, transition,
                           dt, substeps, action_set(accelerations))


def is_terminal(state):
    """A state is terminal once the ego has reached its target."""

    return state.target_reached


def observe(state):
    """Deterministic observation of a joint state."""

    objects = tuple(
        ObservedObject(object_id, other.base.x, other.base.y,
                       other.base.theta, other.base.v, other.policy)
        for object_id, other in zip(state.object_ids, state.others))

    return Observation(state.ego, state.ego_station, objects)


def generative_step(state, action, model):
    """Sample (next state, observation, reward) for one decision step.

    The ego is integrated with :func:`~rbtools.dynamics.step_ego`, using
    the yaw rate that follows its path. Each object moves under its
    augmented policy, handed on to the next region's policy by
    :func:`~rbtools.dynamics.hand_off_policy` as it drives through the
    roundabout, or at constant heading for the 'constant' model.
    The reward is evaluated once, at the end of the step.

    :param state: :class:`JointState`
    :param action: :class:`ActionCommand`
    :param model: :class:`RoundaboutModel`
    :returns: Tuple of (:class:`JointState`, :class:`Observation`, float).
    """

    path = model.path
    total = geometry.path_length(path)
    acceleration = action.acceleration

    ego = state.ego
    station = state.ego_station
    others = [other.base for other in state.others]
    policies = [other.policy for other in state.others]
    policy_based = model.transition == POLICY_TRANSITION

    for _ in range(model.substeps):
        next_station = min(station + ego.v * model.dt, total)
        yaw_rate = dynamics.path_yaw_rate(path, station, next_station, model.dt)
        ego = dynamics.step_ego(ego, acceleration, yaw_rate, model.dt)
        station = next_station

        if policy_based:
            moved = [dynamics.step_policy(other, policy, model.dt)
                     for other, policy in zip(others, policies)]
            policies = [dynamics.hand_off_policy(before, after, policy, model.layout)
                        for before, after, policy in zip(others, moved, policies)]
            others = moved
        else:
            others = [dynamics.step_constant(other, model.dt) for other in others]

    breakdown = rewards.total_reward(ego, others, acceleration, path, model.rewards,
                                     station=station,
                                     target_awarded=state.target_reached)

    reached = state.target_reached or rewards.target_reached(
        ego, path, model.rewards, station)

    next_state = JointState(
        ego, state.object_ids,
        tuple(AugmentedOtherState(base, policy) for base, policy in zip(others, policies)),
        station, reached)

    return next_state, observe(next_state), breakdown.total


def initial_belief(observation, policies):
    """Belief with a point mass on every observed pose and uniform policy priors.

    :param observation: :class:`Observation`
    :param policies: Sequence of :class:`~rbtools.dynamics.DrivingPolicy`.
    """

    policies = tuple(policies)
    uniform = tuple([1. / len(policies)] * len(policies))
    objects = tuple(
        ObjectBelief(obj.object_id,
                     dynamics.OtherVehicleState(obj.x, obj.y, obj.theta, obj.v),
                     policies, uniform)
        for obj in observation.objects)

    return FactoredBelief(observation.ego, observation.ego_station, objects, policies)


def policy_likelihood(observed_policy, policies, match=DEFAULT_LABEL_MATCH):
    """Likelihood of a predicted policy label under each candidate policy.

    The matching policy gets ``match`` and the rest share the remainder.
    An unlabelled observation is equally likely under every policy.
    """

    n_policies = len(policies)
    if observed_policy is None or n_policies == 1:
        return np.ones(n_policies)

    miss = (1. - match) / (n_policies - 1)
    return np.array([match if policy.kind == observed_policy.kind else miss
                     for policy in policies])


def policy_transition_matrix(n_policies, persistence=DEFAULT_POLICY_PERSISTENCE):
    """Row-stochastic matrix of policy changes between two decisions."""

    if n_policies == 1:
        return np.ones((1, 1))

    switch = (1. - persistence) / (n_policies - 1)
    matrix = np.full((n_policies, n_policies), switch)
    np.fill_diagonal(matrix, persistence)
    return matrix


def update_object_belief(prior, transition, likelihood):
    """Bayes update of one object's discrete marginal.

    :param prior: Probabilities over the object's states.
    :param transition: Matrix with transition[s, s'] = P(s' | s).
    :param likelihood: P(o | s') for the received observation.
    :returns: Normalized posterior as a numpy array.
    :raises BeliefUpdateError: If the observation has zero likelihood.
    """

    predicted = np.asarray(transition).T.dot(np.asarray(prior, dtype=float))
    unnormalized = np.asarray(likelihood, dtype=float) * predicted
    normalizer = unnormalized.sum()

    if not normalizer > 0:
        raise BeliefUpdateError('Observation has zero likelihood under the belief')

    return unnormalized / normalizer


def update_joint_belief(prior_joint, transitions, likelihoods):
    """Bayes update over the full joint state space of independent objects.

    :param prior_joint: Array of shape (M1, ..., MN) with joint probabilities.
    :param transitions: Per-object transition matrices.
    :param likelihoods: Per-object observation likelihood vectors.
    :returns: Joint posterior with the same shape as prior_joint.
    """

    prior_joint = np.asarray(prior_joint, dtype=float)
    joint_transition = functools.reduce(np.kron, transitions)
    joint_likelihood = functools.reduce(np.kron, likelihoods)

    posterior = update_object_belief(prior_joint.ravel(), joint_transition,
                                     joint_likelihood)
    return posterior.reshape(prior_joint.shape)


def update_belief(belief, action, observation, likelihood=policy_likelihood,
                  persistence=DEFAULT_POLICY_PERSISTENCE):
    """Update a :class:`FactoredBelief` with an augmented observation.

    Pose and speed collapse onto the observed values. Each object's
    policy marginal is pushed through :func:`policy_transition_matrix` and
    reweighted by ``likelihood(observed_policy, policies)``. Objects seen
    for the first time start from a uniform prior; objects missing from
    the observation are dropped.

    :param belief: :class:`FactoredBelief`
    :param action: The :class:`ActionCommand` that was applied. Policy \
            changes do not depend on it.
    :param observation: :class:`Observation` carrying predicted policies.
    :returns: New :class:`FactoredBelief`.
    :raises BeliefUpdateError: If an object's observation has zero \
            likelihood under its marginal.
    """

    previous = {obj.object_id: obj for obj in belief.objects}
    n_policies = len(belief.policies)
    transition = policy_transition_matrix(n_policies, persistence)
    uniform = np.full(n_policies, 1. / n_policies)

    objects = []
    for obj in observation.objects:
        known = previous.get(obj.object_id)
        prior = uniform if known is None else known.probabilities

        try:
            posterior = update_object_belief(
                prior, transition, likelihood(obj.policy, belief.policies))
        except BeliefUpdateError:
            raise BeliefUpdateError(
                'Observation of object {0} has zero likelihood'.format(obj.object_id))

        objects.append(ObjectBelief(
            obj.object_id,
            dynamics.OtherVehicleState(obj.x, obj.y, obj.theta, obj.v),
            belief.policies,
            tuple(float(p) for p in posterior)))

    return FactoredBelief(observation.ego, observation.ego_station,
                          tuple(objects), belief.policies)


def sample_state(belief, rng_seed):
    """Draw a joint state from a factored belief.

    :param belief: :class:`FactoredBelief`
    :param rng_seed: Integer seed, SeedSequence or numpy Generator.
    :returns: :class:`JointState` with an independently drawn policy \
            for every object.
    """

    if belief is None:
        raise ValueError('Cannot sample from an empty belief')

    if isinstance(rng_seed, np.random.Generator):
        rng = rng_seed
    else:
        rng = np.random.default_rng(rng_seed)

    others = []
    for obj in belief.objects:
        choice = rng.choice(len(obj.policies), p=obj.probabilities)
        others.append(AugmentedOtherState(obj.state, obj.policies[choice]))

    return JointState(belief.ego, tuple(obj.object_id for obj in belief.objects),
                      tuple(others), belief.ego_station, False)


def empty_history(belief):
    """A history holding only the initial belief."""

    return History(belief, (), ())


def append_history(history, action, observation):
    """Extend a history by one (action, observation) pair."""

    return History(history.initial_belief,
                   history.actions + (action,),
                   history.observations + (observation,))


def object_observations(history, object_id):
    """Every observation of one object in the history, oldest first."""

    return [obj for observation in history.observations
            for obj in observation.objects if obj.object_id == object_id]


def state_space_cardinality(num_objects, states_per_object):
    """Size of the unfactored joint state space, M ** N.

    :raises OverflowError: If the count does not fit in a signed 64-bit integer.
    """

    if num_objects < 1 or states_per_object < 1:
        raise ValueError('Need at least one object with at least one state')

    count = states_per_object ** num_objects
    if count > MAX_CARDINALITY:
        raise OverflowError('{0} ** {1} states is too many to count'.format(
            states_per_object, num_objects))
    return count


def check_object_attributes(obj, class_name, layout, schema=DEFAULT_SCHEMA):
    """Check an object against its class attributes and their domains.

    :param obj: An :class:`~rbtools.dynamics.EgoState` or :class:`ObservedObject`.
    :param str class_name: 'ego' or 'vehicle'.
    :param layout: Layout bounding the position domain.
    :raises ValueError: If an attribute is missing or out of its domain.
    """

    if class_name not in schema.classes:
        raise ValueError('Unknown object class "{0}"'.format(class_name))

    for attribute in schema.attributes[class_name]:
        if not hasattr(obj, attribute):
            raise ValueError('{0} object is missing attribute "{1}"'.format(
                class_name, attribute))

    if not 0 <= obj.theta < TWO_PI:
        raise ValueError('Heading {0} is outside [0, 2*pi)'.format(obj.theta))
    if obj.v < 0:
        raise ValueError('Speed must not be negative')

    extent = max(length for _, length in layout.arms) + layout.lane_width
    if np.hypot(obj.x - layout.center[0], obj.y - layout.center[1]) > extent:
        raise ValueError('Position ({0}, {1}) is outside the layout'.format(obj.x, obj.y))

    policy = getattr(obj, 'policy', None)
    if policy is not None and policy.kind not in dynamics.POLICY_KINDS:
        raise ValueError('Unknown driving policy "{0}"'.format(policy.kind))
