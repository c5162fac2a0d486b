"""
==================
The rewards module
==================

The reward earned by the ego vehicle at each decision step is the
weighted sum of five components::

    total = c1 * collision + c2 * gap + c3 * velocity + c4 * target + c5 * comfort

Every component except the target bonus is a penalty and so never
positive. :func:`total_reward` evaluates all five and returns them as a
:class:`RewardBreakdown`.

The module also holds :func:`clamp_jerk`, the rule that re-selects an
acceleration when the planner asks for too large a change between two
decision steps.

"""

import collections
import math

from . import geometry

RewardConfig = collections.namedtuple(
    'RewardConfig',
    ['c1', 'c2', 'c3', 'c4', 'c5',
     'collision_penalty_value', 'C_exceed', 'C_lower', 'c_gap',
     'a_max', 'a_y_max', 'b_max', 'v_limit',
     'vehicle_length', 'vehicle_width', 'J_max',
     'target_reward_value', 'target_radius', 'comfort_penalty_value',
     'gap_horizon', 'preceding_lateral_tolerance'])
RewardConfig.__new__.__defaults__ = (
    1.0, 1.0, 1.0, 1.0, 1.0,
    -1000.0, -100.0, -10.0, -10.0,
    4.0, 2.0, 3.0, 10.0,
    5.0, 1.8, 1.0,
    1000.0, 2.0, -100.0,
    100.0, 4.0)

RewardBreakdown = collections.namedtuple(
    'RewardBreakdown', ['collision', 'gap', 'velocity', 'target', 'comfort', 'total'])


def check_reward_config(cfg):
    """Raise a ValueError if the configuration breaks the penalty ordering."""

    if not cfg.C_exceed < cfg.C_lower < 0:
        raise ValueError('Rewards must satisfy C_exceed < C_lower < 0')
    if not cfg.c_gap < 0:
        raise ValueError('c_gap must be negative')
    if not cfg.a_max > cfg.a_y_max > 0:
        raise ValueError('Rewards must satisfy a_max > a_y_max > 0')
    for name in ('b_max', 'v_limit', 'vehicle_length', 'vehicle_width',
                 'J_max', 'target_radius', 'gap_horizon'):
        if not getattr(cfg, name) > 0:
            raise ValueError('{0} must be positive'.format(name))


def boundary_radius(length, width):
    """Radius of the circle used to bound a vehicle, sqrt(W^2 + (L/2)^2)."""

    return math.sqrt(width ** 2 + (length / 2.) ** 2)


def safe_distance(v_lim, a_max, dims_ego, dims_other):
    """Center distance below which the collision penalty applies.

    :param float v_lim: Speed limit of the road (m/s).
    :param float a_max: Acceleration bound (m/s^2).
    :param tuple dims_ego: (length, width) of the ego vehicle (m).
    :param tuple dims_other: (length, width) of the other vehicle (m).
    :returns: Braking threshold plus both boundary radii (m).
    """

    if a_max <= 0:
        raise ValueError('a_max must be positive')

    threshold = v_lim ** 2 / (2 * a_max)
    return threshold + boundary_radius(*dims_ego) + boundary_radius(*dims_other)


def _config_safe_distance(cfg):
    dims = (cfg.vehicle_length, cfg.vehicle_width)
    return safe_distance(cfg.v_limit, cfg.a_max, dims, dims)


def _distance(first, second):
    return math.hypot(first.x - second.x, first.y - second.y)


def find_nearest(ego, others):
    """Index of the vehicle nearest to the ego, or None if there are none."""

    if not others:
        return None
    distances = [_distance(ego, other) for other in others]
    return min(range(len(others)), key=distances.__getitem__)


def find_preceding(ego_station, others, path, cfg):
    """Index of the vehicle directly ahead of the ego on its path.

    A vehicle is ahead when it projects onto the ego path within
    ``preceding_lateral_tolerance`` of the centerline and at a station
    greater than the ego's, but no further than ``gap_horizon``.

    :returns: Index into others, or None.
    """

    best = None
    for index, other in enumerate(others):
        station, lateral = geometry.project_to_path(path, (other.x, other.y))
        ahead = station - ego_station
        if abs(lateral) > cfg.preceding_lateral_tolerance:
            continue
        if 0 < ahead <= cfg.gap_horizon and (best is None or ahead < best[0]):
            best = (ahead, index)

    return None if best is None else best[1]


def collision_penalty(ego, nearest, cfg):
    """Large penalty when the nearest vehicle is within the safe distance.

    The comparison is inclusive; a vehicle exactly at the safe distance
    is penalized. Returns 0 when there is no other vehicle.
    """

    if nearest is None:
        return 0.
    if _distance(ego, nearest) <= _config_safe_distance(cfg):
        return cfg.collision_penalty_value
    return 0.


def desired_velocity(curvature, cfg):
    """Fastest speed keeping lateral acceleration within a_y_max, capped at v_limit."""

    curvature = abs(curvature)
    if curvature == 0:
        return cfg.v_limit
    return min(math.sqrt(cfg.a_y_max / curvature), cfg.v_limit)


def velocity_penalty(v_e, v_des, cfg):
    """Relative speed error, penalized harder above v_des than below it."""

    if v_des <= 0:
        raise ValueError('Desired velocity must be positive')

    relative_error = abs(v_e - v_des) / v_des
    if v_e > v_des:
        return cfg.C_exceed * relative_error
    if v_e < v_des:
        return cfg.C_lower * relative_error
    return 0.


def comfort_penalty(a_x, v, curvature, cfg):
    """Penalty when the combined acceleration reaches a_max."""

    a_y = v ** 2 * abs(curvature)
    if math.hypot(a_x, a_y) >= cfg.a_max:
        return cfg.comfort_penalty_value
    return 0.


def gap_reward(ego, preceding, cfg):
    """Penalty for following distance away from the three-second-rule gap.

    :param ego: Ego state with position and speed v.
    :param preceding: Nearest vehicle ahead on the ego path, or None.
    """

    if preceding is None:
        return 0.

    v_3s = max(ego.v - 3 * cfg.b_max, 0.)
    desired_gap = (ego.v ** 2 - v_3s ** 2) / (2 * cfg.a_max)
    return cfg.c_gap * abs(_distance(ego, preceding) - desired_gap)


def target_reached(ego, path, cfg, station=None):
    """True once the ego is within target_radius of the target or past the path end."""

    distance = math.hypot(ego.x - path.target_point[0], ego.y - path.target_point[1])
    if distance <= cfg.target_radius:
        return True
    return station is not None and station >= geometry.path_length(path)


def target_reward(ego, path, cfg, awarded=False, station=None):
    """One-shot bonus for reaching the target.

    :param bool awarded: Whether the bonus was already paid this episode.
    """

    if not awarded and target_reached(ego, path, cfg, station):
        return cfg.target_reward_value
    return 0.


def total_reward(ego, others, a_x, path, cfg, station=None, target_awarded=False):
    """Evaluate all five reward components for one decision step.

    :param ego: :class:`~rbtools.dynamics.EgoState`
    :param list others: Background vehicle states with x, y, theta, v.
    :param float a_x: Applied linear acceleration (m/s^2).
    :param path: Ego :class:`~rbtools.geometry.PathSpec`.
    :param cfg: :class:`RewardConfig`
    :param float station: Ego station on its path; projected from the \
            ego position when not given.
    :param bool target_awarded: Whether the target bonus was already paid.
    :returns: :class:`RewardBreakdown`
    """

    total_length = geometry.path_length(path)
    if station is None:
        station, _ = geometry.project_to_path(path, (ego.x, ego.y))
    curvature = geometry.curvature_at(path, min(max(station, 0.), total_length))

    nearest = find_nearest(ego, others)
    preceding = find_preceding(station, others, path, cfg)

    collision = collision_penalty(ego, None if nearest is None else others[nearest], cfg)
    gap = gap_reward(ego, None if preceding is None else others[preceding], cfg)
    velocity = velocity_penalty(ego.v, desired_velocity(curvature, cfg), cfg)
    target = target_reward(ego, path, cfg, target_awarded, station)
    comfort = comfort_penalty(a_x, ego.v, curvature, cfg)

    total = (cfg.c1 * collision + cfg.c2 * gap + cfg.c3 * velocity +
             cfg.c4 * target + cfg.c5 * comfort)

    return RewardBreakdown(collision, gap, velocity, target, comfort, total)


def clamp_jerk(a_t, a_prev, J_max):
    """Re-select an acceleration whose change from a_prev exceeds J_max.

    >>> clamp_jerk(2.5, 0.0, 1.0)
    1.0
    >>> clamp_jerk(-3.0, 1.5, 1.0)
    0.5
    """

    if J_max <= 0:
        raise ValueError('J_max must be positive')

    if abs(a_t - a_prev) <= J_max:
        return a_t
    if a_t > a_prev:
        return a_prev + J_max
    return a_prev - J_max
