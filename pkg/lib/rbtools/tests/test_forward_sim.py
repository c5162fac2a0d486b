from rbtools import forward_sim, geometry, output
import json
import os
import pytest

layout = geometry.default_layout()


@pytest.fixture(scope='module')
def tables():
    return forward_sim.forward_simulate(layout)


def test_three_tables(tables):
    assert list(tables) == [forward_sim.GROUND_TRUTH_FILE, forward_sim.CONSTANT_MODEL_FILE,
                            forward_sim.POLICY_MODEL_FILE]
    for table in tables.values():
        assert len(table) == 101
        assert list(table.columns) == forward_sim.FORWARD_COLUMNS

def test_tables_share_initial_state(tables):
    first_rows = [table.iloc[0][['x', 'y', 'theta', 'v']].tolist() for table in tables.values()]
    assert first_rows[0] == first_rows[1] == first_rows[2]

def test_ground_truth_on_path(tables):
    assert tables[forward_sim.GROUND_TRUTH_FILE].lateral_error.max() < 1e-6

def test_policy_model_tracks_path(tables):
    assert tables[forward_sim.POLICY_MODEL_FILE].lateral_error.max() < 0.5

def test_constant_model_drifts(tables):
    assert tables[forward_sim.CONSTANT_MODEL_FILE].lateral_error.max() > 5.

def test_default_speed_tracks_path():
    assert forward_sim.ForwardSimConfig().speed == forward_sim.TRACKING_SPEED

def test_fast_rollout_drifts_further(tables):
    with pytest.warns(UserWarning):
        fast = forward_sim.forward_simulate(layout, forward_sim.ForwardSimConfig(speed=6.))
    policy_error = fast[forward_sim.POLICY_MODEL_FILE].lateral_error.max()
    assert tables[forward_sim.POLICY_MODEL_FILE].lateral_error.max() < policy_error < 2.
    assert policy_error < fast[forward_sim.CONSTANT_MODEL_FILE].lateral_error.max()

def test_starts_before_entry_arc():
    path = geometry.build_roundabout_path(layout, 3, 1)
    entry_start = geometry.segment_bounds(path, geometry.ENTRY_ARC)[0]
    assert forward_sim.start_station(path, 2.) == pytest.approx(entry_start - 2.)
    assert forward_sim.start_station(path, 1000.) == 0.

def test_invalid_config():
    with pytest.raises(ValueError):
        forward_sim.forward_simulate(layout, forward_sim.ForwardSimConfig(steps=0))
    with pytest.raises(ValueError):
        forward_sim.forward_simulate(layout, forward_sim.ForwardSimConfig(speed=0.))

def test_write_forward_sim(tables, tmpdir):
    forward_sim.write_forward_sim(tables, str(tmpdir))
    with open(str(tmpdir.join(output.MANIFEST_FILE))) as manifest_file:
        manifest = json.load(manifest_file)
    assert sorted(manifest['artifacts']) == sorted(os.listdir(str(tmpdir)))
