"""
================
The utils module
================

The utils module contains small helpers shared by the other modules:
heading arithmetic, finite-value checks and the decimal formatting
used for every number rbtools writes to disk.

"""

import argparse
import math

import numpy as np

TWO_PI = 2.0 * math.pi

FLOAT_FORMAT = '%.9g'


def wrap_angle(theta):
    """Wrap a heading into the half-open interval [0, 2*pi).

    :param float theta: Heading in radians.
    :returns: Equivalent heading in [0, 2*pi).
    """

    wrapped = theta % TWO_PI

    # A tiny negative input rounds up to exactly 2*pi
    if wrapped >= TWO_PI:
        return 0.0

    return wrapped


def wrapped_difference(theta_from, theta_to):
    """Signed smallest rotation taking theta_from onto theta_to.

    :param float theta_from: Starting heading in radians.
    :param float theta_to: Final heading in radians.
    :returns: Rotation in [-pi, pi).
    """

    return (theta_to - theta_from + math.pi) % TWO_PI - math.pi


def check_finite(**values):
    """Raise a ValueError naming the first argument that is NaN or infinite.

    >>> check_finite(x=1.0, v=float('nan'))
    Traceback (most recent call last):
    ...
    ValueError: v must be finite (got nan)
    """

    for name, value in values.items():
        if not np.isfinite(value):
            raise ValueError('{0} must be finite (got {1})'.format(name, value))


def round_sig(value):
    """Round a float to the precision that is written to disk.

    Values that are re-read from an output table compare exactly
    against values passed through this function.
    """

    return float(FLOAT_FORMAT % value)


def parse_seed_range(seed_string):
    """Turn a command-line seed specification into a list of integers.

    Accepts a single seed ("7"), a comma separated list ("1,3,5") or an
    inclusive range ("0..19").

    :param str seed_string: Seed specification.
    :returns: List of integer seeds.
    :raises argparse.ArgumentTypeError: If the specification is malformed \
            or describes no seeds.
    """

    seeds = []

    try:
        for part in seed_string.split(','):
            part = part.strip()
            if '..' in part:
                start, stop = part.split('..')
                seeds.extend(range(int(start), int(stop) + 1))
            else:
                seeds.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(
            'Could not parse seed specification "{0}"'.format(seed_string))

    if not seeds:
        raise argparse.ArgumentTypeError(
            'Seed specification "{0}" is empty'.format(seed_string))

    return seeds
