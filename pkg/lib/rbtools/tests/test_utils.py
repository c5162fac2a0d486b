from rbtools import utils
import argparse
import math
import pytest


def test_wrap_angle_in_range():
    assert utils.wrap_angle(1.0) == 1.0

def test_wrap_angle_negative():
    assert utils.wrap_angle(-math.pi / 2) == pytest.approx(1.5 * math.pi)

def test_wrap_angle_full_turn():
    assert utils.wrap_angle(2 * math.pi) == 0.0

def test_wrap_angle_tiny_negative():
    wrapped = utils.wrap_angle(-1e-20)
    assert 0 <= wrapped < 2 * math.pi

def test_wrapped_difference_across_seam():
    assert utils.wrapped_difference(2 * math.pi - 0.1, 0.1) == pytest.approx(0.2)
    assert utils.wrapped_difference(0.1, 2 * math.pi - 0.1) == pytest.approx(-0.2)

def test_check_finite():
    utils.check_finite(x=1.0, y=-2.0)
    with pytest.raises(ValueError):
        utils.check_finite(x=float('inf'))

def test_round_sig():
    assert utils.round_sig(1.0 / 3) == float('%.9g' % (1.0 / 3))
    assert utils.round_sig(-1000.0) == -1000.0

def test_seed_single():
    assert utils.parse_seed_range('7') == [7]

def test_seed_list():
    assert utils.parse_seed_range('1,3,5') == [1, 3, 5]

def test_seed_range():
    assert utils.parse_seed_range('0..19') == list(range(20))

def test_seed_range_empty():
    with pytest.raises(argparse.ArgumentTypeError):
        utils.parse_seed_range('5..2')

def test_seed_garbage():
    with pytest.raises(argparse.ArgumentTypeError):
        utils.parse_seed_range('a..b')
