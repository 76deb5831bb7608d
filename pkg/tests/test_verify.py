"""
Tests for exact-semantics trajectory verification.
"""

import json

import numpy as np
import pytest

from stlcfs.dynamics.model import propagate
from stlcfs.verify.checks import stl_margin_trace, verify

from conftest import O1_CENTER, make_scenario

pytestmark = pytest.mark.unit

CHECK_NAMES = [
    "dynamics", "initial_conditions", "planar_speed", "acceleration", "collision", "stl", "inter_sample_risk",
]


def hover(s):
    return propagate(s.x_init_array(), s.v_init_array(), np.zeros((s.T - 1, 3)), s.dt)


def test_hover_without_goals_or_obstacles_passes():
    s = make_scenario(goals=[])
    report = verify(s, hover(s))
    assert report.passed
    assert [c.name for c in report.checks] == CHECK_NAMES
    assert report.check("collision").margin == float("inf")
    assert report.check("stl").margin == float("inf")
    assert report.check("dynamics").margin == 0.0


def test_hover_misses_goal(simple_scenario):
    report = verify(simple_scenario, hover(simple_scenario))
    assert not report.passed
    stl = report.check("stl")
    assert not stl.passed
    assert stl.margin == pytest.approx(0.2 - np.sqrt(116.0))
    assert stl.location == {"k": 0, "t": 6}
    assert [c.name for c in report.failures] == ["stl"]


def test_collision_margin_at_obstacle_center(urban_scenario):
    s = urban_scenario
    traj = hover(s)
    traj.x[4] = O1_CENTER
    report = verify(s, traj)
    collision = report.check("collision")
    assert collision.margin == pytest.approx(-2.5)
    assert collision.location == {"m": 0, "t": 5}
    assert not report.passed


def test_speed_and_acceleration_limits(simple_scenario):
    s = simple_scenario
    traj = hover(s)
    traj.v[3] = [3.0, 4.5, 0.0]
    traj.a[2] = [0.0, 0.0, -2.5]
    report = verify(s, traj)
    speed = report.check("planar_speed")
    assert speed.margin == pytest.approx(5.0 - np.hypot(3.0, 4.5))
    assert speed.location == {"t": 4}
    accel = report.check("acceleration")
    assert accel.margin == pytest.approx(-0.5)
    assert accel.location == {"t": 3, "axis": 2}
    # the edits also break the dynamics rows
    assert not report.check("dynamics").passed


def test_initial_condition_check(simple_scenario):
    s = simple_scenario
    traj = hover(s)
    traj.x += [0.0, 0.0, 1e-3]
    report = verify(s, traj)
    assert report.check("initial_conditions").margin == pytest.approx(-1e-3)
    assert report.check("dynamics").passed


def test_tolerance_controls_pass():
    s = make_scenario(goals=[])
    traj = hover(s)
    traj.x[1] += 1e-7
    assert not verify(s, traj, tol=1e-8).check("dynamics").passed
    assert verify(s, traj, tol=1e-6).check("dynamics").passed


def test_stl_margin_trace_is_running_max(simple_scenario):
    s = simple_scenario
    traj = hover(s)
    traj.x[7] = s.goals[0].center
    (trace,) = stl_margin_trace(s, traj)
    assert trace.shape == (7,)
    assert np.all(np.diff(trace) >= 0.0)
    assert trace[2] == pytest.approx(0.2)
    assert trace[-1] == pytest.approx(0.2)


def test_inter_sample_risk_is_soft(urban_scenario):
    s = urban_scenario
    traj = hover(s)
    # one long segment straddling the first obstacle, both ends clear of it
    traj.x[:2] = [9.0, 10.0, 7.5]
    traj.x[2:] = [16.0, 10.0, 7.5]
    report = verify(s, traj)
    risk = report.check("inter_sample_risk")
    assert not risk.hard
    assert not risk.passed
    assert risk.margin == pytest.approx(1.0 - 3.5)
    assert risk.location == {"m": 0, "t": 2}
    assert risk.message is not None
    assert report.check("collision").passed


def test_report_serializes_infinite_margins():
    s = make_scenario(goals=[])
    payload = verify(s, hover(s)).json()
    assert "Infinity" in payload
    assert json.loads(payload)["passed"] is True
