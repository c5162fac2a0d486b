"""
===================
The geometry module
===================

The geometry module describes the roundabout itself: its layout, the
designated paths vehicles follow through it, which driving region a point
lies in and the curvature of a path at a given station.

Layouts and paths
=================

A :class:`RoundaboutLayout` is a circular single-lane ring with straight
arms aimed at its center. Traffic drives on the right and circulates
counter-clockwise. Each arm carries an inbound lane half a lane width to
the right of the arm axis and an outbound lane half a lane width to the
left.

:func:`build_roundabout_path` joins an inbound lane to an outbound lane
with five segments::

    Straight -> EntryArc -> RingArc -> ExitArc -> Straight

The entry and exit arcs have the fixed curvature
``-entry_exit_curvature`` (a clockwise turn) and touch both the arm lane
and the ring tangentially. Their end points are found in closed form from
the external tangency of the arc circle and the ring circle.

Stations
========

Positions along a path are given as a station, the arc length from the
path start. Segment boundaries belong to the later segment.

"""

import collections
import math

import numpy as np

from .utils import wrap_angle, TWO_PI

STRAIGHT_SEGMENT = 'Straight'
ENTRY_ARC = 'EntryArc'
RING_ARC = 'RingArc'
EXIT_ARC = 'ExitArc'

REGION_STRAIGHT = 'Straight'
REGION_ENTER_EXIT = 'EnterExit'
REGION_RING = 'Ring'

CONTINUITY_TOLERANCE = 1e-6


class LayoutError(ValueError):
    """Exception raised for an impossible layout or path request."""
    pass


class OffRoadError(ValueError):
    """Exception raised when a query point lies outside the drivable area."""
    pass


RoundaboutLayout = collections.namedtuple(
    'RoundaboutLayout',
    ['center', 'ring_radius', 'lane_width', 'arms',
     'entry_exit_curvature', 'entry_exit_band'])
RoundaboutLayout.__new__.__defaults__ = (
    (0.0, 0.0), 20.0, 4.0,
    ((0.0, 60.0), (math.pi / 2, 60.0), (math.pi, 60.0), (3 * math.pi / 2, 60.0)),
    0.15, 6.0)
RoundaboutLayout.__doc__ = """Geometry of a single-lane roundabout.

Arms are ``(heading, length)`` pairs. The heading points from the center
out along the arm, so the default arms are east, north, west and south.
"""

Segment = collections.namedtuple(
    'Segment', ['kind', 'start', 'end', 'curvature', 'length', 'heading'])

PathSpec = collections.namedtuple('PathSpec', ['segments', 'target_point'])


def default_layout():
    """Four-arm layout with a 20 m ring and 60 m arms."""

    return RoundaboutLayout()


def validate_layout(layout):
    """Check the invariants of a :class:`RoundaboutLayout`.

    :param layout: Layout to check.
    :raises LayoutError: If any invariant is violated.
    """

    if layout.ring_radius <= 0:
        raise LayoutError('ring_radius must be positive')
    if layout.lane_width <= 0:
        raise LayoutError('lane_width must be positive')
    if layout.entry_exit_curvature <= 0:
        raise LayoutError('entry_exit_curvature must be positive')
    if layout.entry_exit_band < 0:
        raise LayoutError('entry_exit_band must not be negative')
    if layout.lane_width / 2. >= layout.ring_radius:
        raise LayoutError('lane_width is too large for the ring')
    if len(layout.arms) < 2:
        raise LayoutError('A roundabout needs at least two arms')

    headings = [wrap_angle(heading) for heading, _ in layout.arms]
    for i, first in enumerate(headings):
        for second in headings[i + 1:]:
            separation = abs(first - second)
            if min(separation, TWO_PI - separation) < 1e-9:
                raise LayoutError('Arm headings must be distinct')

    tangent_x = tangent_offset(layout)
    for heading, length in layout.arms:
        if length <= tangent_x:
            raise LayoutError(
                'Arm at heading {0:.3f} is {1} m long but the entry arc '
                'starts {2:.3f} m from the center'.format(heading, length, tangent_x))


def tangent_offset(layout):
    """Distance along an arm from the center to where the entry arc starts."""

    rho = 1. / layout.entry_exit_curvature
    offset = layout.lane_width / 2. + rho
    return math.sqrt((layout.ring_radius + rho) ** 2 - offset ** 2)


def _tangent_angle(layout):
    """Angle between an arm axis and the point where its entry arc meets the ring."""

    rho = 1. / layout.entry_exit_curvature
    return math.atan2(layout.lane_width / 2. + rho, tangent_offset(layout))


def _to_world(layout, arm_heading, local_x, local_y):
    """Rotate a point from an arm's local frame into world coordinates."""

    cos_h, sin_h = math.cos(arm_heading), math.sin(arm_heading)
    return (layout.center[0] + local_x * cos_h - local_y * sin_h,
            layout.center[1] + local_x * sin_h + local_y * cos_h)


def _to_local(layout, arm_heading, position):
    """Rotate a world point into an arm's local frame (arm along +x)."""

    dx = position[0] - layout.center[0]
    dy = position[1] - layout.center[1]
    cos_h, sin_h = math.cos(arm_heading), math.sin(arm_heading)
    return dx * cos_h + dy * sin_h, -dx * sin_h + dy * cos_h


def _advance(start, heading, curvature, distance):
    """Position reached after driving distance along a constant-curvature segment."""

    if curvature == 0:
        return (start[0] + distance * math.cos(heading),
                start[1] + distance * math.sin(heading))

    final_heading = heading + curvature * distance
    return (start[0] + (math.sin(final_heading) - math.sin(heading)) / curvature,
            start[1] - (math.cos(final_heading) - math.cos(heading)) / curvature)


def make_segment(kind, start, heading, curvature, length):
    """Build a :class:`Segment`, deriving its end point.

    :param str kind: One of Straight, EntryArc, RingArc, ExitArc.
    :param tuple start: Start position (m).
    :param float heading: Heading at the start (rad).
    :param float curvature: Signed curvature, counter-clockwise positive (1/m).
    :param float length: Arc length (m).
    """

    start = (float(start[0]), float(start[1]))
    end = _advance(start, heading, curvature, length)
    return Segment(kind, start, end, float(curvature), float(length), wrap_angle(heading))


def straight_path(start, heading, length):
    """A path made of a single straight segment.

    :param tuple start: Start position (m).
    :param float heading: Direction of travel (rad).
    :param float length: Length (m).
    :returns: :class:`PathSpec`
    """

    segment = make_segment(STRAIGHT_SEGMENT, start, heading, 0.0, length)
    return PathSpec((segment,), segment.end)


def build_roundabout_path(layout, entry_arm, exit_arm):
    """Build the designated path from one arm to another.

    :param layout: :class:`RoundaboutLayout` to drive through.
    :param int entry_arm: Index of the arm the vehicle arrives on.
    :param int exit_arm: Index of the arm the vehicle leaves on.
    :returns: :class:`PathSpec` with the five segments \
            Straight, EntryArc, RingArc, ExitArc, Straight.
    :raises LayoutError: If either index is invalid, if entry and exit \
            are the same arm, or if the arms are too close together for \
            the entry and exit arcs to fit.
    """

    n_arms = len(layout.arms)
    for arm in (entry_arm, exit_arm):
        if not 0 <= arm < n_arms:
            raise LayoutError(
                'Arm index {0} is out of range for a layout with {1} arms'.format(
                    arm, n_arms))
    if entry_arm == exit_arm:
        raise LayoutError('Entry and exit arm are both {0}: U-turn paths '
                          'are not supported'.format(entry_arm))

    entry_heading, entry_length = layout.arms[entry_arm]
    exit_heading, exit_length = layout.arms[exit_arm]

    rho = 1. / layout.entry_exit_curvature
    half_lane = layout.lane_width / 2.
    tangent_x = tangent_offset(layout)
    tangent_angle = _tangent_angle(layout)

    sweep = (exit_heading - entry_heading) % TWO_PI - 2 * tangent_angle
    if sweep <= 1e-9:
        raise LayoutError('Arms {0} and {1} are too close together for a '
                          'path between them'.format(entry_arm, exit_arm))

    for length in (entry_length, exit_length):
        if length <= tangent_x:
            raise LayoutError('Arm is shorter than the entry/exit arc offset')

    arc_length = rho * (math.pi / 2 - tangent_angle)
    plan = [
        (STRAIGHT_SEGMENT, 0.0, entry_length - tangent_x),
        (ENTRY_ARC, -layout.entry_exit_curvature, arc_length),
        (RING_ARC, 1. / layout.ring_radius, layout.ring_radius * sweep),
        (EXIT_ARC, -layout.entry_exit_curvature, arc_length),
        (STRAIGHT_SEGMENT, 0.0, exit_length - tangent_x),
    ]

    position = _to_world(layout, entry_heading, entry_length, half_lane)
    heading = entry_heading + math.pi
    segments = []

    for kind, curvature, length in plan:
        segment = make_segment(kind, position, heading, curvature, length)
        segments.append(segment)
        position = segment.end
        heading = heading + curvature * length

    return PathSpec(tuple(segments), segments[-1].end)


def path_length(path):
    """Total arc length of a path (m)."""

    return float(sum(segment.length for segment in path.segments))


def segment_offsets(path):
    """Station at which each segment starts, followed by the total length."""

    return np.concatenate([[0.], np.cumsum([s.length for s in path.segments])])


def segment_at(path, station):
    """Find the segment containing a station.

    Boundary stations belong to the later segment; the final station
    belongs to the last segment.

    :param path: :class:`PathSpec`
    :param float station: Arc length from the path start (m).
    :returns: Tuple of (segment index, distance into that segment).
    :raises ValueError: If the station is outside the path.
    """

    offsets = segment_offsets(path)
    total = offsets[-1]

    if station < -1e-9 or station > total + 1e-9 or not np.isfinite(station):
        raise ValueError('Station {0} is outside the path [0, {1}]'.format(
            station, total))

    index = int(np.searchsorted(offsets[1:], station, side='right'))
    index = min(index, len(path.segments) - 1)
    local = min(max(station - offsets[index], 0.), path.segments[index].length)

    return index, local


def segment_bounds(path, kind):
    """Start and end station of the first segment of the given kind.

    :returns: Tuple (start, end), or None if the path has no such segment.
    """

    offsets = segment_offsets(path)
    for index, segment in enumerate(path.segments):
        if segment.kind == kind:
            return offsets[index], offsets[index + 1]
    return None


def point_at(path, station):
    """Position on the path centerline at a station."""

    index, local = segment_at(path, station)
    segment = path.segments[index]
    return _advance(segment.start, segment.heading, segment.curvature, local)


def heading_at(path, station):
    """Direction of travel on the path at a station, in [0, 2*pi)."""

    index, local = segment_at(path, station)
    segment = path.segments[index]
    return wrap_angle(segment.heading + segment.curvature * local)


def curvature_at(path, station):
    """Signed curvature of the path at a station (1/m).

    :param path: :class:`PathSpec`
    :param float station: Arc length from the path start (m).
    :returns: Curvature of the containing segment; ties at segment \
            boundaries resolve to the later segment.
    :raises ValueError: If the station is outside the path.
    """

    index, _ = segment_at(path, station)
    return path.segments[index].curvature


def _project_to_segment(segment, position):
    """Nearest point of one segment: (distance into segment, distance, lateral offset)."""

    px, py = position

    if segment.curvature == 0:
        dir_x, dir_y = math.cos(segment.heading), math.sin(segment.heading)
        along = (px - segment.start[0]) * dir_x + (py - segment.start[1]) * dir_y
        local = min(max(along, 0.), segment.length)
    else:
        curvature = segment.curvature
        radius = 1. / curvature
        center_x = segment.start[0] - radius * math.sin(segment.heading)
        center_y = segment.start[1] + radius * math.cos(segment.heading)

        if math.hypot(px - center_x, py - center_y) < 1e-12:
            local = 0.
        else:
            radial = math.atan2(py - center_y, px - center_x)
            if curvature > 0:
                turned = (radial + math.pi / 2 - segment.heading) % TWO_PI
            else:
                turned = (segment.heading - (radial - math.pi / 2)) % TWO_PI
            local = turned / abs(curvature)

            if local > segment.length:
                # Outside the arc: one of the end points is nearest
                start_gap = math.hypot(px - segment.start[0], py - segment.start[1])
                end_gap = math.hypot(px - segment.end[0], py - segment.end[1])
                local = 0. if start_gap <= end_gap else segment.length

    qx, qy = _advance(segment.start, segment.heading, segment.curvature, local)
    tangent = segment.heading + segment.curvature * local
    lateral = math.cos(tangent) * (py - qy) - math.sin(tangent) * (px - qx)

    return local, math.hypot(px - qx, py - qy), lateral


def project_to_path(path, position):
    """Project a point onto a path.

    :param path: :class:`PathSpec`
    :param tuple position: World position (m).
    :returns: Tuple of (station, lateral offset). The lateral offset is \
            positive to the left of the direction of travel. When several \
            path points are equally near, the smallest station wins.
    """

    best = None
    offset = 0.

    for segment in path.segments:
        local, distance, lateral = _project_to_segment(segment, position)
        if best is None or distance < best[0] - 1e-12:
            best = (distance, offset + local, lateral)
        offset += segment.length

    return best[1], best[2]


def classify_region(layout, position):
    """Find which driving region a point lies in.

    :param layout: :class:`RoundaboutLayout`
    :param tuple position: World position (m).
    :returns: One of ``REGION_RING``, ``REGION_ENTER_EXIT`` or \
            ``REGION_STRAIGHT``. Points on the boundary between two \
            regions belong to the innermost one.
    :raises OffRoadError: If the point is outside the ring annulus and \
            every arm corridor.
    """

    radial = math.hypot(position[0] - layout.center[0],
                        position[1] - layout.center[1])
    ring_outer = layout.ring_radius + layout.lane_width / 2.

    if layout.ring_radius - layout.lane_width / 2. <= radial <= ring_outer:
        return REGION_RING

    if radial > ring_outer:
        for heading, length in layout.arms:
            local_x, local_y = _to_local(layout, heading, position)
            if 0 < local_x <= length + 1e-9 and abs(local_y) <= layout.lane_width:
                if radial <= ring_outer + layout.entry_exit_band:
                    return REGION_ENTER_EXIT
                return REGION_STRAIGHT

    raise OffRoadError('Position ({0:.3f}, {1:.3f}) is not on the road'.format(
        position[0], position[1]))
