"""
============================
The policy_prediction module
============================

Predicts which driving policy each background vehicle is following.

The prediction looks at the last ``window`` observations of a vehicle.
Their mean yaw rate and the region of the newest position each vote for
a policy:

- yaw rate within ``yaw_threshold`` of zero votes Straight, above it
  Circulate, below it EnterExit;
- a position in the Straight, Ring or EnterExit region votes Straight,
  Circulate or EnterExit respectively, with weight ``region_weight``.

A clearly negative yaw rate only happens on the clockwise entry and exit
arcs, so it always means EnterExit. Vehicles with too few observations
keep the default policy.

"""

import collections

import numpy as np

from . import dynamics, geometry, pomdp
from .utils import wrapped_difference

PolicySet = collections.namedtuple('PolicySet', ['policies', 'default_policy'])

PredictionConfig = collections.namedtuple(
    'PredictionConfig',
    ['window', 'yaw_threshold', 'region_weight', 'observation_interval',
     'default_policy'])
PredictionConfig.__new__.__defaults__ = (5, 0.05, 2.0, 1.0, dynamics.STRAIGHT)

REGION_VOTES = {
    geometry.REGION_STRAIGHT: dynamics.STRAIGHT,
    geometry.REGION_ENTER_EXIT: dynamics.ENTER_EXIT,
    geometry.REGION_RING: dynamics.CIRCULATE,
}


class UnknownObjectError(KeyError):
    """Exception raised when a prediction is requested for an unseen object."""
    pass


def check_prediction_config(cfg):
    """Raise a ValueError if the prediction configuration is unusable."""

    if cfg.window < 2:
        raise ValueError('Prediction window must hold at least 2 observations')
    if not cfg.yaw_threshold > 0:
        raise ValueError('yaw_threshold must be positive')
    if not cfg.region_weight > 1:
        raise ValueError('region_weight must exceed the single yaw-rate vote')
    if not cfg.observation_interval > 0:
        raise ValueError('observation_interval must be positive')
    if cfg.default_policy not in dynamics.POLICY_KINDS:
        raise ValueError('Unknown default policy "{0}"'.format(cfg.default_policy))


def policy_set_for_layout(layout, default_kind=dynamics.STRAIGHT):
    """The three driving policies of a layout."""

    policies = tuple(dynamics.policy_for_kind(kind, layout)
                     for kind in dynamics.POLICY_KINDS)
    return PolicySet(policies, dynamics.policy_for_kind(default_kind, layout))


def estimate_yaw_rate(headings, dt):
    """Mean yaw rate over a sequence of headings sampled every dt seconds.

    Successive differences are wrapped, so crossing the 0/2*pi seam
    does not produce a spurious full turn.
    """

    if len(headings) < 2:
        raise ValueError('At least two headings are needed to estimate a yaw rate')

    steps = [wrapped_difference(first, second)
             for first, second in zip(headings[:-1], headings[1:])]
    return float(np.mean(steps)) / dt


def _yaw_vote(yaw_rate, threshold):
    if yaw_rate > threshold:
        return dynamics.CIRCULATE
    if yaw_rate < -threshold:
        return dynamics.ENTER_EXIT
    return dynamics.STRAIGHT


def predict_policy(history, object_id, layout, cfg):
    """Predict the current driving policy of one object.

    :param history: :class:`~rbtools.pomdp.History` including the newest \
            observation.
    :param object_id: Identifier of the object.
    :param layout: :class:`~rbtools.geometry.RoundaboutLayout`
    :param cfg: :class:`PredictionConfig`
    :returns: Tuple of (DrivingPolicy, curvature parameter).
    :raises UnknownObjectError: If the object never appears in the history.
    """

    observations = pomdp.object_observations(history, object_id)
    if not observations:
        raise UnknownObjectError(object_id)

    if len(observations) <= cfg.window:
        policy = dynamics.policy_for_kind(cfg.default_policy, layout)
        return policy, policy.curvature

    recent = observations[-cfg.window:]
    yaw_rate = estimate_yaw_rate([obs.theta for obs in recent], cfg.observation_interval)
    yaw_vote = _yaw_vote(yaw_rate, cfg.yaw_threshold)

    if yaw_vote == dynamics.ENTER_EXIT:
        kind = yaw_vote
    else:
        try:
            region = geometry.classify_region(layout, (recent[-1].x, recent[-1].y))
        except geometry.OffRoadError:
            kind = yaw_vote
        else:
            scores = collections.Counter({yaw_vote: 1.})
            scores[REGION_VOTES[region]] += cfg.region_weight
            kind = max(scores, key=scores.get)

    policy = dynamics.policy_for_kind(kind, layout)
    return policy, policy.curvature


def predict_all(history, observation, layout, cfg):
    """Predict the policy of every object in an observation."""

    return {obj.object_id: predict_policy(history, obj.object_id, layout, cfg)
            for obj in observation.objects}


def augment_observation(observation, predictions):
    """Attach predicted policies to every object of an observation.

    :param observation: :class:`~rbtools.pomdp.Observation`
    :param dict predictions: Object id to (DrivingPolicy, curvature).
    :returns: New observation; only the policy fields change.
    :raises UnknownObjectError: If an object has no prediction.
    """

    objects = []
    for obj in observation.objects:
        if obj.object_id not in predictions:
            raise UnknownObjectError(obj.object_id)
        objects.append(obj._replace(policy=predictions[obj.object_id][0]))

    return observation._replace(objects=tuple(objects))
