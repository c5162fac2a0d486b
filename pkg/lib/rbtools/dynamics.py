"""
===================
The dynamics module
===================

Discrete-time kinematic models used to move vehicles forward in time.

Ego and background vehicles
===========================

The ego vehicle carries its own yaw rate in its state and is advanced
with :func:`step_ego`. Background vehicles are only observed through
their pose and speed. They can be moved forward either with the
constant-velocity model (:func:`step_constant`), which keeps speed and
heading fixed, or with the policy-based model (:func:`step_policy`), in
which the heading turns at the yaw rate implied by the vehicle's current
driving policy. All three use explicit forward Euler integration.

Driving policies
================

A :class:`DrivingPolicy` is one of three behaviours, each tied to the
curvature of the region it is used in:

- Straight: curvature 0, used on the arms.
- EnterExit: the clockwise entry/exit arc curvature.
- Circulate: the counter-clockwise ring curvature.

During search a simulated vehicle keeps its policy only while it stays
in that policy's region; :func:`hand_off_policy` moves it on to the next
region's policy as it enters, joins the ring or leaves it.

Car following
=============

Simulated background traffic is driven longitudinally by the Intelligent
Driver Model, see :func:`idm_acceleration`.

"""

import collections
import math

from . import geometry
from .utils import wrap_angle, wrapped_difference, check_finite

STRAIGHT = 'Straight'
ENTER_EXIT = 'EnterExit'
CIRCULATE = 'Circulate'

POLICY_KINDS = (STRAIGHT, ENTER_EXIT, CIRCULATE)

# Strongest deceleration a simulated vehicle can physically command (m/s^2)
MAX_PHYSICAL_BRAKE = 9.0

# Heading error (rad) still counted as driving along an inbound lane
HANDOFF_TOLERANCE = 0.1


class VehicleOverlapError(ValueError):
    """Exception raised when a follower and its leader overlap."""
    pass


EgoState = collections.namedtuple('EgoState', ['x', 'y', 'theta', 'v', 'w'])

OtherVehicleState = collections.namedtuple(
    'OtherVehicleState', ['x', 'y', 'theta', 'v'])

DrivingPolicy = collections.namedtuple('DrivingPolicy', ['kind', 'curvature'])

IdmParams = collections.namedtuple(
    'IdmParams',
    ['desired_speed', 'min_gap', 'time_headway',
     'max_acceleration', 'comfortable_deceleration', 'exponent'])
IdmParams.__new__.__defaults__ = (10.0, 2.0, 1.5, 2.5, 3.0, 4.0)


def policy_for_kind(kind, layout):
    """The :class:`DrivingPolicy` of a given kind for a layout.

    :param str kind: One of Straight, EnterExit or Circulate.
    :param layout: :class:`~rbtools.geometry.RoundaboutLayout`
    :returns: :class:`DrivingPolicy` with its curvature parameter.
    """

    if kind == STRAIGHT:
        return DrivingPolicy(STRAIGHT, 0.0)
    if kind == ENTER_EXIT:
        return DrivingPolicy(ENTER_EXIT, -layout.entry_exit_curvature)
    if kind == CIRCULATE:
        return DrivingPolicy(CIRCULATE, 1. / layout.ring_radius)
    raise ValueError('Unknown driving policy "{0}"'.format(kind))


def policy_for_segment(kind, layout):
    """The driving policy that follows a path segment of the given kind."""

    if kind == geometry.RING_ARC:
        return policy_for_kind(CIRCULATE, layout)
    if kind in (geometry.ENTRY_ARC, geometry.EXIT_ARC):
        return policy_for_kind(ENTER_EXIT, layout)
    return policy_for_kind(STRAIGHT, layout)


def check_idm_params(params):
    """Raise a ValueError unless every IDM parameter is usable."""

    for name, value in params._asdict().items():
        if not value > 0:
            raise ValueError('IDM parameter {0} must be positive'.format(name))
    if params.exponent < 1:
        raise ValueError('IDM exponent must be at least 1')


def step_ego(state, acceleration, yaw_rate, dt):
    """Advance the ego vehicle by one Euler step.

    :param state: :class:`EgoState` at the start of the step.
    :param float acceleration: Linear acceleration (m/s^2).
    :param float yaw_rate: Yaw rate held over the step (rad/s).
    :param float dt: Step length (s).
    :returns: :class:`EgoState` at the end of the step. Speed never \
            drops below zero.
    """

    if dt <= 0:
        raise ValueError('dt must be positive')
    check_finite(x=state.x, y=state.y, theta=state.theta, v=state.v,
                 acceleration=acceleration, yaw_rate=yaw_rate, dt=dt)

    return EgoState(
        state.x + state.v * math.cos(state.theta) * dt,
        state.y + state.v * math.sin(state.theta) * dt,
        wrap_angle(state.theta + yaw_rate * dt),
        max(0., state.v + acceleration * dt),
        yaw_rate)


def step_constant(state, dt):
    """Advance a background vehicle at fixed speed and heading."""

    if dt <= 0:
        raise ValueError('dt must be positive')
    check_finite(x=state.x, y=state.y, theta=state.theta, v=state.v, dt=dt)

    return OtherVehicleState(
        state.x + state.v * math.cos(state.theta) * dt,
        state.y + state.v * math.sin(state.theta) * dt,
        wrap_angle(state.theta),
        state.v)


def yaw_rate_for(policy, v):
    """Yaw rate generated by a driving policy at speed v (rad/s)."""

    return v * policy.curvature


def step_policy(state, policy, dt):
    """Advance a background vehicle under a driving policy.

    Position and speed follow :func:`step_constant`; the heading turns at
    :func:`yaw_rate_for` the current speed.
    """

    if dt <= 0:
        raise ValueError('dt must be positive')
    check_finite(x=state.x, y=state.y, theta=state.theta, v=state.v, dt=dt)

    return OtherVehicleState(
        state.x + state.v * math.cos(state.theta) * dt,
        state.y + state.v * math.sin(state.theta) * dt,
        wrap_angle(state.theta + yaw_rate_for(policy, state.v) * dt),
        state.v)


def _nearest_arm_heading(layout, state):
    angle = math.atan2(state.y - layout.center[1], state.x - layout.center[0])
    return min((heading for heading, _ in layout.arms),
               key=lambda heading: abs(wrapped_difference(heading, angle)))


def _along_arm(layout, heading, state):
    return ((state.x - layout.center[0]) * math.cos(heading) +
            (state.y - layout.center[1]) * math.sin(heading))


def _radial_heading(layout, state):
    """Heading measured from the outward radial direction, in [-pi, pi)."""

    angle = math.atan2(state.y - layout.center[1], state.x - layout.center[0])
    return wrapped_difference(angle, state.theta)


def hand_off_policy(before, after, policy, layout, tolerance=HANDOFF_TOLERANCE):
    """Driving policy for the next step, given the step just taken.

    A policy only holds inside its own region. When a step carries a
    vehicle across a region boundary the policy is handed on:

    - Straight to EnterExit once an inbound vehicle passes the start of
      its entry arc.
    - EnterExit to Circulate once an entering vehicle has turned onto the
      counter-clockwise ring tangent.
    - EnterExit to Straight once an exiting vehicle has turned onto the
      heading of the arm it is leaving on.

    Circulate is kept, since the exit a circulating vehicle will take is
    not known.

    :param before: :class:`OtherVehicleState` at the start of the step.
    :param after: :class:`OtherVehicleState` at the end of the step.
    :param policy: :class:`DrivingPolicy` used for the step.
    :param layout: :class:`~rbtools.geometry.RoundaboutLayout`
    :param float tolerance: Largest heading error (rad) for a vehicle \
            to count as driving along an inbound lane.
    """

    if policy.kind == STRAIGHT:
        arm = _nearest_arm_heading(layout, after)
        inbound = abs(wrapped_difference(arm + math.pi, after.theta)) <= tolerance
        offset = geometry.tangent_offset(layout)
        if inbound and _along_arm(layout, arm, after) <= offset < _along_arm(layout, arm, before):
            return policy_for_kind(ENTER_EXIT, layout)

    elif policy.kind == ENTER_EXIT:
        if _radial_heading(layout, before) > math.pi / 2 >= _radial_heading(layout, after):
            return policy_for_kind(CIRCULATE, layout)

        arm = _nearest_arm_heading(layout, after)
        if wrapped_difference(arm, before.theta) > 0 >= wrapped_difference(arm, after.theta):
            return policy_for_kind(STRAIGHT, layout)

    return policy


def idm_acceleration(gap, v, v_leader, params):
    """Intelligent Driver Model acceleration.

    :param float gap: Bumper-to-bumper distance to the leader (m). Use \
            ``float('inf')`` when there is no leader.
    :param float v: Speed of the follower (m/s).
    :param float v_leader: Speed of the leader (m/s).
    :param params: :class:`IdmParams`
    :returns: Commanded acceleration, limited to \
            [-MAX_PHYSICAL_BRAKE, max_acceleration].
    :raises VehicleOverlapError: If the gap is not positive.
    """

    if gap <= 0:
        raise VehicleOverlapError('IDM gap must be positive (got {0})'.format(gap))

    a_max = params.max_acceleration
    desired_gap = (params.min_gap + v * params.time_headway +
                   v * (v - v_leader) / (2 * math.sqrt(a_max * params.comfortable_deceleration)))

    free_road = (v / params.desired_speed) ** params.exponent
    interaction = (desired_gap / gap) ** 2 if math.isfinite(gap) else 0.

    acceleration = a_max * (1 - free_road - interaction)

    return min(max(acceleration, -MAX_PHYSICAL_BRAKE), a_max)


def idm_equilibrium_gap(v, params):
    """Gap at which a follower matching its leader's speed v does not accelerate."""

    if v >= params.desired_speed:
        return float('inf')

    desired_gap = params.min_gap + v * params.time_headway
    return desired_gap / math.sqrt(1 - (v / params.desired_speed) ** params.exponent)


def simulate_path_follow(initial, policy_sequence, dt, n):
    """Roll a background vehicle forward under a sequence of policies.

    :param initial: :class:`OtherVehicleState` to start from.
    :param policy_sequence: One :class:`DrivingPolicy` per step.
    :param float dt: Step length (s).
    :param int n: Number of steps.
    :returns: List of the n + 1 visited states, starting with initial.
    """

    if n < 1:
        raise ValueError('At least one step must be simulated')
    if len(policy_sequence) < n:
        raise ValueError('Need {0} policies but got {1}'.format(n, len(policy_sequence)))

    trajectory = [initial]
    for policy in policy_sequence[:n]:
        trajectory.append(step_policy(trajectory[-1], policy, dt))

    return trajectory


def path_policy_sequence(path, layout, start_station, v, dt, n):
    """Region-correct policies for a vehicle travelling a path at constant speed.

    The policy for each step is the one belonging to the segment under
    the vehicle at the middle of that step.
    """

    total = geometry.path_length(path)
    sequence = []

    for step in range(n):
        station = min(start_station + (step + 0.5) * v * dt, total)
        index, _ = geometry.segment_at(path, station)
        sequence.append(policy_for_segment(path.segments[index].kind, layout))

    return sequence


def path_yaw_rate(path, station, next_station, dt):
    """Yaw rate that turns a vehicle through the path heading change over one step.

    This is the curvature-derived yaw rate averaged over the step, so a
    step straddling a segment boundary blends both curvatures.
    """

    return wrapped_difference(geometry.heading_at(path, station),
                              geometry.heading_at(path, next_station)) / dt
