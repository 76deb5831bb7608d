"""
Tests for the variable layout and the convex subproblem assembly.
"""

import math

import numpy as np
import pytest

from stlcfs.assembly.builder import (
    audit_convexity,
    build_subproblem,
    linearized_objective,
    objective_value_exact,
    rho_relaxation_gaps,
    row_counts,
    surrogate_objective,
)
from stlcfs.assembly.layout import VariableLayout
from stlcfs.core.errors import DimensionMismatchError
from stlcfs.dynamics.model import dynamics_residuals, propagate
from stlcfs.planner.manager import PlanManager
from stlcfs.scenario.schemas import Weights
from stlcfs.solver.admm import solve
from stlcfs.stl.robustness import rho_window, smooth_chain

from conftest import make_scenario

pytestmark = pytest.mark.unit


def hover(s):
    return propagate(s.x_init_array(), s.v_init_array(), np.zeros((s.T - 1, 3)), s.dt)


def references(s, traj):
    rho = [rho_window(traj, goal) for goal in s.goals]
    mu = [smooth_chain(r, s.params.alpha) for r in rho]
    return rho, mu


def urban_reference(s):
    return PlanManager.repair_reference(s, PlanManager.initial_reference(s))


# --- layout ---------------------------------------------------------------------

def test_layout_ranges_are_contiguous_and_cover_n():
    layout = VariableLayout(30, [(4, 15), (10, 22), (16, 30)], 3, with_hinge=True, elastic=True)
    stops = 0
    for name, (start, stop) in layout.ranges().items():
        assert start == stops, name
        stops = stop
    assert stops == layout.n
    assert layout.n == 30 * 9 - 3 + (23 + 25 + 29) + 90 + 3


def test_layout_column_helpers():
    layout = VariableLayout(10, [(3, 5)], 2)
    assert layout.x_col(1, 0) == 0
    assert layout.x_col(10, 2) == 29
    assert layout.a_col(1, 0) == 60
    assert layout.rho_slice(0) == slice(87, 90)
    assert layout.mu_slice(0) == slice(90, 92)
    assert layout.mu_end_col(0) == 91
    assert layout.hinge_col(1, 1) == 92 + 10
    with pytest.raises(IndexError):
        layout.sigma_col(0)


def test_single_step_window_terminal_is_rho():
    layout = VariableLayout(5, [(3, 3)], 0, with_hinge=False)
    assert layout.mu_end_col(0) == layout.rho_slice(0).start
    assert layout.mu_slice(0).stop - layout.mu_slice(0).start == 0


def test_pack_and_update_references_round_trip(urban_scenario):
    s = urban_scenario
    traj = urban_reference(s)
    rho, mu = references(s, traj)
    layout = VariableLayout(s.T, [g.window for g in s.goals], s.M)
    z = layout.pack(traj, rho, mu)

    back, rho_back, mu_back = PlanManager.update_references(z, layout)
    np.testing.assert_array_equal(back.x, traj.x)
    np.testing.assert_array_equal(back.a, traj.a)
    for k in range(s.K):
        np.testing.assert_array_equal(rho_back[k], rho[k])
        np.testing.assert_array_equal(mu_back[k][1:], mu[k][1:])
        assert mu_back[k][0] == rho[k][0]


def test_layout_rejects_wrong_length(simple_scenario):
    layout = VariableLayout(simple_scenario.T, [(6, 12)], 0)
    with pytest.raises(DimensionMismatchError):
        layout.trajectory(np.zeros(layout.n + 1))


# --- program structure --------------------------------------------------------------

def test_urban_program_row_counts(urban_scenario):
    s = urban_scenario
    ref = urban_reference(s)
    rho, mu = references(s, ref)
    sub = build_subproblem(s, ref, rho, mu)
    assert row_counts(sub.program) == {
        "dynamics": 180,
        "mu_chain": 37,
        "planar_speed": 90,
        "accel_bounds": 174,
        "rho_soc": 160,
        "stl_terminal": 3,
        "cfs": 90,
        "hinge": 180,
    }
    assert sub.program.m == 914
    assert sub.program.n == sub.layout.n
    assert len(sub.cfs) == 90


def test_zero_hinge_weight_drops_hinge(urban_scenario):
    s = urban_scenario.copy(update={"weights": Weights(w1=10.0, w2=0.1, w3=0.0, d_safe=0.5)})
    ref = urban_reference(s)
    rho, mu = references(s, ref)
    sub = build_subproblem(s, ref, rho, mu)
    assert "hinge" not in sub.program.row_labels
    assert sub.layout.hinge.stop == sub.layout.hinge.start
    assert "cfs" in sub.program.row_labels


def test_elastic_program_adds_sigma(urban_scenario):
    s = urban_scenario
    ref = urban_reference(s)
    rho, mu = references(s, ref)
    sub = build_subproblem(s, ref, rho, mu, elastic=True)
    assert sub.elastic
    assert row_counts(sub.program)["stl_terminal"] == 6
    assert np.all(sub.program.q[sub.layout.sigma] == s.params.elastic_weight)


def test_urban_program_is_convex(urban_scenario):
    s = urban_scenario
    ref = urban_reference(s)
    rho, mu = references(s, ref)
    sub = build_subproblem(s, ref, rho, mu)
    assert audit_convexity(sub.program, sub.chains) == []


def test_cost_vector(urban_scenario):
    s = urban_scenario
    ref = urban_reference(s)
    rho, mu = references(s, ref)
    sub = build_subproblem(s, ref, rho, mu)
    q, layout = sub.program.q, sub.layout
    for k in range(s.K):
        assert q[layout.mu_end_col(k)] == -s.weights.w1
    assert np.all(q[layout.hinge] == s.weights.w3)
    diag = sub.program.P.diagonal()
    assert np.all(diag[layout.a] == 2 * s.weights.w2)
    assert np.all(diag[: layout.a.start] == 0)


def test_reference_mismatch_raises(urban_scenario):
    s = urban_scenario
    ref = urban_reference(s)
    rho, mu = references(s, ref)
    with pytest.raises(DimensionMismatchError):
        build_subproblem(s, ref, rho[:2], mu)
    with pytest.raises(DimensionMismatchError):
        build_subproblem(s, ref, [rho[0][1:]] + rho[1:], mu)


# --- objectives --------------------------------------------------------------------

def test_zero_weights_give_zero_objective():
    s = make_scenario(weights={"w1": 0.0, "w2": 0.0, "w3": 0.0, "d_safe": 0.5})
    assert objective_value_exact(s, hover(s)) == 0.0


def test_control_effort_only_objective():
    s = make_scenario(T=30, weights={"w1": 0.0, "w2": 1.0, "w3": 0.0, "d_safe": 0.5})
    traj = propagate(s.x_init_array(), s.v_init_array(), np.tile([1.0, 0.0, 0.0], (29, 1)), s.dt)
    assert objective_value_exact(s, traj) == pytest.approx(29.0, abs=1e-12)


def test_hover_objective_is_distance_to_goal():
    s = make_scenario(weights={"w1": 1.0, "w2": 1.0, "w3": 1.0, "d_safe": 0.5})
    assert objective_value_exact(s, hover(s)) == pytest.approx(math.sqrt(116.0) - 0.2, abs=1e-12)


def test_linearized_objective_is_exact_at_reference(urban_scenario):
    s = urban_scenario
    ref = urban_reference(s)
    rho, mu = references(s, ref)
    assert linearized_objective(s, ref, rho, mu) == pytest.approx(
        surrogate_objective(s, ref, rho), abs=1e-9
    )


# --- solves ---------------------------------------------------------------------------

def _solve_with_fallback(s, ref, rho, mu, tol):
    sub = build_subproblem(s, ref, rho, mu)
    res = solve(sub.program, tol=tol)
    if not res.ok:
        sub = build_subproblem(s, ref, rho, mu, elastic=True, w3_scale=2.0)
        res = solve(sub.program, tol=tol)
    return sub, res


@pytest.mark.integration
def test_hover_reference_subproblem_solves(simple_scenario):
    s = simple_scenario
    ref = hover(s)
    rho, mu = references(s, ref)
    sub, res = _solve_with_fallback(s, ref, rho, mu, 1e-6)
    assert res.ok
    traj = sub.layout.trajectory(res.z)
    assert float(dynamics_residuals(traj, s.dt).max()) <= 1e-4
    assert np.all(np.abs(traj.a) <= s.a_max + 1e-4)


@pytest.mark.integration
def test_rho_cone_rows_are_tight_where_weighted(simple_scenario):
    s = simple_scenario
    ref = hover(s)
    rho, mu = references(s, ref)
    sub, res = _solve_with_fallback(s, ref, rho, mu, 1e-8)
    assert res.ok
    for gap in rho_relaxation_gaps(s, sub, res.z):
        weighted = gap[~np.isnan(gap)]
        assert weighted.size > 0
        assert np.all(weighted >= -1e-5)
        assert np.all(weighted <= 1e-5)
