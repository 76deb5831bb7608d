"""
Tests for reference construction, repair and the outer planning loop.
"""

import numpy as np
import pytest

from stlcfs.dynamics.model import Trajectory, dynamics_residuals
from stlcfs.geometry.sdf import signed_distance
from stlcfs.cli.plan_cli import exit_code_for
from stlcfs.core.settings import EXIT_INFEASIBLE, EXIT_UNVERIFIED
from stlcfs.planner.manager import PlanManager, anchor_step, plan
from stlcfs.planner.schemas import PlanStatus
from stlcfs.solver.schemas import SolveResult, SolveStatus

from conftest import make_scenario

pytestmark = pytest.mark.unit


@pytest.mark.parametrize("window, step", [((4, 15), 10), ((10, 22), 16), ((16, 30), 23), ((3, 3), 3), ((1, 2), 2)])
def test_anchor_step_rounds_half_up(window, step):
    assert anchor_step(window) == step


def test_initial_reference_passes_through_anchors(urban_scenario):
    s = urban_scenario
    ref = PlanManager.initial_reference(s)
    assert ref.T == 30
    np.testing.assert_array_equal(ref.x[0], s.x_init)
    for goal, step in zip(s.goals, (10, 16, 23)):
        np.testing.assert_allclose(ref.position(step), goal.center, atol=1e-12)
    np.testing.assert_allclose(ref.x[-1], s.goals[-1].center, atol=1e-12)
    assert float(dynamics_residuals(ref, s.dt).max()) <= 1e-9


def test_initial_reference_without_goals_hovers():
    s = make_scenario(goals=[])
    ref = PlanManager.initial_reference(s)
    assert np.all(ref.x == s.x_init_array())
    assert np.all(ref.a == 0.0)


def test_repair_moves_colliding_runs_out_of_obstacles(urban_scenario):
    s = urban_scenario
    initial = PlanManager.initial_reference(s)
    repaired = PlanManager.repair_reference(s, initial)

    # first obstacle: steps 7 and 8 pushed out through the -x face
    np.testing.assert_allclose(repaired.x[6:8, 0], [9.5, 9.5])
    np.testing.assert_array_equal(repaired.x[6:8, 1:], initial.x[6:8, 1:])
    # second obstacle: steps 14 and 15 pushed out through the +y face
    np.testing.assert_allclose(repaired.x[13:15, 1], [30.5, 30.5])
    np.testing.assert_array_equal(repaired.x[13:15, [0, 2]], initial.x[13:15, [0, 2]])

    untouched = np.ones(30, dtype=bool)
    untouched[[6, 7, 13, 14]] = False
    np.testing.assert_array_equal(repaired.x[untouched], initial.x[untouched])
    for box in s.obstacles:
        assert min(signed_distance(x_t, box) for x_t in repaired.x) > 0.0


def test_repair_is_noop_without_collisions(simple_scenario):
    ref = PlanManager.initial_reference(simple_scenario)
    repaired = PlanManager.repair_reference(simple_scenario, ref)
    np.testing.assert_array_equal(repaired.x, ref.x)


def test_finalize_clips_and_propagates(simple_scenario):
    s = simple_scenario
    T = s.T
    x = np.tile(s.x_init_array(), (T, 1))
    v = np.zeros((T, 3))
    a = np.zeros((T - 1, 3))
    a[0] = [5.0, -3.0, 0.5]
    final = PlanManager.finalize_trajectory(s, Trajectory(x, v, a))
    np.testing.assert_array_equal(final.a[0], [2.0, -2.0, 0.5])
    np.testing.assert_array_equal(final.x[0], s.x_init_array())
    assert float(dynamics_residuals(final, s.dt).max()) <= 1e-12
    np.testing.assert_allclose(final.v[1], [2.0, -2.0, 0.5])


@pytest.mark.integration
def test_simple_plan_converges_and_verifies(simple_scenario):
    result = plan(simple_scenario)
    assert result.status == PlanStatus.CONVERGED
    assert result.verified
    assert result.best_iteration is not None
    assert 1 <= len(result.records) <= simple_scenario.params.max_outer_iters
    assert result.trace.K == 1
    stl = result.report.check("stl")
    assert stl.margin >= 0.0


@pytest.mark.integration
def test_unreachable_goal_is_not_reported_converged():
    s = make_scenario(
        goals=[{"center": [100.0, 0.0, 5.0], "window": [2, 3], "epsilon": 0.2}],
        params={"max_outer_iters": 3},
    )
    result = plan(s)
    assert result.status != PlanStatus.CONVERGED
    assert not result.verified
    assert not result.report.check("stl").passed


@pytest.mark.integration
def test_plan_is_deterministic(simple_scenario):
    first = plan(simple_scenario)
    second = plan(simple_scenario)
    np.testing.assert_array_equal(first.trajectory.x, second.trajectory.x)
    assert [r.exact_obj for r in first.records] == [r.exact_obj for r in second.records]


# cavity [37, 43] x [-3, 3] x [2, 8] walled in by 12 m thick slabs
SEALED_SHELL = [
    {"lower": [25.0, -15.0, -10.0], "upper": [37.0, 15.0, 20.0]},
    {"lower": [43.0, -15.0, -10.0], "upper": [55.0, 15.0, 20.0]},
    {"lower": [25.0, -15.0, -10.0], "upper": [55.0, -3.0, 20.0]},
    {"lower": [25.0, 3.0, -10.0], "upper": [55.0, 15.0, 20.0]},
    {"lower": [25.0, -15.0, -10.0], "upper": [55.0, 15.0, 2.0]},
    {"lower": [25.0, -15.0, 8.0], "upper": [55.0, 15.0, 20.0]},
]


@pytest.mark.integration
def test_goal_inside_sealed_region_is_infeasible():
    s = make_scenario(
        T=12,
        goals=[{"center": [40.0, 0.0, 5.0], "window": [6, 12], "epsilon": 0.2}],
        obstacles=SEALED_SHELL,
    )
    result = plan(s)
    assert result.status == PlanStatus.INFEASIBLE
    assert not result.verified
    assert result.records[-1].solver_status == SolveStatus.INFEASIBLE_DETECTED.value
    assert result.records[-1].elastic
    assert exit_code_for(result) == EXIT_INFEASIBLE


def test_solver_iteration_cap_is_not_reported_infeasible(simple_scenario, monkeypatch):
    calls = []

    def capped_solve(program, tol=1e-6, max_iters=50_000, warm_start=None):
        calls.append(program)
        n, m = program.P.shape[0], program.A.shape[0]
        return SolveResult(
            status=SolveStatus.MAX_ITERS, z=np.zeros(n), s=np.zeros(m), y=np.zeros(m),
            primal_residual=1.0, dual_residual=1.0, duality_gap=1.0,
            iterations=max_iters, solve_time=0.0, objective=float("nan"),
        )

    monkeypatch.setattr("stlcfs.planner.manager.solve", capped_solve)
    result = plan(simple_scenario)
    assert len(calls) == 2  # strict solve, then the elastic retry
    assert result.status == PlanStatus.UNVERIFIED
    assert result.records[-1].solver_status == "max_iters"
    assert result.best_iteration is None
    assert exit_code_for(result) == EXIT_UNVERIFIED


@pytest.mark.parametrize(
    "solver_status, have_verified, expected",
    [
        (SolveStatus.INFEASIBLE_DETECTED, False, PlanStatus.INFEASIBLE),
        (SolveStatus.NUMERICAL_FAILURE, True, PlanStatus.NUMERICAL_FAILURE),
        (SolveStatus.MAX_ITERS, True, PlanStatus.MAX_ITERS),
        (SolveStatus.MAX_ITERS, False, PlanStatus.UNVERIFIED),
    ],
)
def test_failure_status_mapping(solver_status, have_verified, expected):
    assert PlanManager._failure_status(solver_status, have_verified) == expected
