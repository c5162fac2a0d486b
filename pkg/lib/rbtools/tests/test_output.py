from rbtools import output, simulator
import json
import os
import pandas as pd
import pytest


def tiny_metrics():
    rows = [[0.0, 'ego', 2.0, -60.0, 1.5707963267948966, 5.0, 0.0, 0.0,
             0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [1.0, 'ego', 2.0, -55.0, 1.5707963267948966, 5.0, 0.0, 0.0,
             0.0, 0.0, -5.0, 0.0, 0.0, -5.0]]
    trajectory = pd.DataFrame(rows, columns=output.TRAJECTORY_COLUMNS)
    return simulator.EpisodeMetrics(-5.0, 60.0, 0, 0, 0, False, trajectory)


def test_write_run_files(tmpdir):
    run_dir = str(tmpdir.join('run'))
    manifest = output.write_run(tiny_metrics(), run_dir, 'ego_only', 'baseline', 3)

    assert sorted(os.listdir(run_dir)) == sorted(manifest.artifacts)
    assert manifest.artifacts[-1] == output.MANIFEST_FILE

def test_manifest_contents(tmpdir):
    run_dir = str(tmpdir)
    output.write_run(tiny_metrics(), run_dir, 'ego_only', 'baseline', 3)

    with open(os.path.join(run_dir, output.MANIFEST_FILE)) as manifest_file:
        manifest = json.load(manifest_file)

    assert manifest['planner'] == 'baseline'
    assert manifest['seeds'] == [3]
    assert manifest['artifacts'] == [output.TRAJECTORY_FILE, output.METRICS_FILE,
                                     output.MANIFEST_FILE]

def test_metrics_document(tmpdir):
    run_dir = str(tmpdir)
    output.write_run(tiny_metrics(), run_dir, 'ego_only', 'baseline', 3)

    with open(os.path.join(run_dir, output.METRICS_FILE)) as metrics_file:
        metrics = json.load(metrics_file)

    assert metrics['total_reward'] == -5.0
    assert metrics['reached_target'] is False
    assert metrics['seed'] == 3

def test_trajectory_round_trip(tmpdir):
    run_dir = str(tmpdir)
    output.write_run(tiny_metrics(), run_dir, 'ego_only', 'baseline', 3)

    trajectory = pd.read_csv(os.path.join(run_dir, output.TRAJECTORY_FILE))
    assert list(trajectory.columns) == output.TRAJECTORY_COLUMNS
    assert trajectory.r_total.sum() == pytest.approx(-5.0, abs=1e-9)
    assert trajectory.theta[0] == pytest.approx(1.57079633, abs=1e-9)

def test_nine_significant_digits(tmpdir):
    path = str(tmpdir.join('table.csv'))
    output.write_table(pd.DataFrame({'x': [1.0 / 3]}), path)
    with open(path) as table:
        assert table.read().splitlines() == ['x', '0.333333333']

def test_ensure_directory_nested(tmpdir):
    nested = str(tmpdir.join('a', 'b', 'c'))
    output.ensure_directory(nested)
    output.ensure_directory(nested)
    assert os.path.isdir(nested)

def test_same_seed_byte_identical(tmpdir):
    first, second = str(tmpdir.join('first')), str(tmpdir.join('second'))
    for run_dir in (first, second):
        simulator.run_to_directory('two_vehicle', 'baseline', 4, run_dir)

    for file_name in (output.TRAJECTORY_FILE, output.METRICS_FILE):
        with open(os.path.join(first, file_name), 'rb') as first_file, \
                open(os.path.join(second, file_name), 'rb') as second_file:
            assert first_file.read() == second_file.read()
