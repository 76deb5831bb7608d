"""
End-to-end checks on the bundled urban delivery scenario.
"""

import json

import numpy as np
import pytest
from typer.testing import CliRunner

from stlcfs.cli.artifacts import read_iterations_csv, read_trajectory_csv
from stlcfs.cli.main_cli import main_app
from stlcfs.core.settings import EXIT_OK, EXIT_VERIFY_FAILED
from stlcfs.dynamics.model import dynamics_residuals, planar_speed
from stlcfs.geometry.sdf import signed_distance
from stlcfs.scenario.loader import load_scenario
from stlcfs.verify.checks import stl_margin_trace

from conftest import URBAN_SCENARIO

pytestmark = pytest.mark.integration

TOL = 1e-6

runner = CliRunner()


@pytest.fixture(scope="module")
def urban_runs(tmp_path_factory):
    """Two independent CLI runs on the bundled scenario."""
    outs = []
    for name in ("first", "second"):
        out = tmp_path_factory.mktemp(name)
        result = runner.invoke(main_app, ["plan", str(URBAN_SCENARIO), "--out", str(out), "-q"])
        assert result.exit_code == EXIT_OK, result.output
        outs.append(out)
    return outs


@pytest.fixture(scope="module")
def urban_trajectory(urban_runs):
    return read_trajectory_csv(urban_runs[0] / "trajectory.csv")


def test_summary_reports_convergence(urban_runs):
    summary = json.loads((urban_runs[0] / "summary.json").read_text(encoding="utf-8"))
    assert summary["status"] == "converged"
    assert summary["passed"] is True
    assert summary["iterations"] <= 10


def test_every_goal_is_visited(urban_trajectory):
    s = load_scenario(URBAN_SCENARIO)
    for goal in s.goals:
        x = urban_trajectory.x[goal.tau_start - 1: goal.tau_end]
        closest = float(np.min(np.linalg.norm(x - goal.center_array(), axis=1)))
        assert closest <= goal.epsilon + TOL


def test_collision_free(urban_trajectory):
    s = load_scenario(URBAN_SCENARIO)
    for box in s.obstacles:
        for x_t in urban_trajectory.x:
            assert signed_distance(x_t, box) >= -TOL


def test_dynamically_feasible(urban_trajectory):
    s = load_scenario(URBAN_SCENARIO)
    assert np.all(planar_speed(urban_trajectory) <= s.v_max + TOL)
    assert np.all(np.abs(urban_trajectory.a) <= s.a_max + TOL)
    assert float(dynamics_residuals(urban_trajectory, s.dt).max()) <= TOL
    np.testing.assert_array_equal(urban_trajectory.x[0], s.x_init)


def test_objective_settles_within_budget(urban_runs):
    records = read_iterations_csv(urban_runs[0] / "iterations.csv")
    assert 2 <= len(records) <= 10
    last, before = records[-1]["exact_obj"], records[-2]["exact_obj"]
    assert abs(last - before) / max(abs(before), 1.0) < 1e-3
    for r in records:
        assert r["solve_time_s"] <= 2.0
    for prev, cur in zip(records[1:], records[2:]):
        assert cur["exact_obj"] <= prev["exact_obj"] + 1e-6


def test_margin_traces_rise_to_zero(urban_trajectory):
    s = load_scenario(URBAN_SCENARIO)
    for trace in stl_margin_trace(s, urban_trajectory):
        assert np.all(np.diff(trace) >= 0.0)
        assert trace[-1] >= -TOL


def test_runs_are_byte_identical(urban_runs):
    first, second = (out / "trajectory.csv" for out in urban_runs)
    assert first.read_bytes() == second.read_bytes()


def test_edited_trajectory_fails_verification(urban_runs, tmp_path):
    lines = (urban_runs[0] / "trajectory.csv").read_text(encoding="utf-8").splitlines()
    cells = lines[10].split(",")
    cells[1] = repr(float(cells[1]) + 1.0)
    lines[10] = ",".join(cells)
    edited = tmp_path / "trajectory.csv"
    edited.write_text("\n".join(lines) + "\n", encoding="utf-8")

    result = runner.invoke(main_app, ["verify", str(URBAN_SCENARIO), str(edited)])
    assert result.exit_code == EXIT_VERIFY_FAILED
