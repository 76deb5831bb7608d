"""
Builds the convex subproblem solved at each outer iteration.

At a reference (x̄, ρ̄, μ̄) the program is

    minimize   −w1·Σ_k p_k·μ_k(τ_end) + w2·Σ_t ‖a_t‖² + w3·Σ_{m,t} e_{m,t}
    subject to double-integrator dynamics and initial state
               planar speed and acceleration limits
               (ε_k − ρ_k(t), x_t − h_k) ∈ SOC          for t in each window
               linearized μ chains, μ_k(τ_end) ≥ 0
               g_{m,t}·x_t + c_{m,t} ≥ 0                  (tangent half-spaces)
               e_{m,t} ≥ 0,  e_{m,t} ≥ d_safe − g_{m,t}·x_t − c_{m,t}

where p_k is the goal priority. The elastic variant adds σ_k ≥ 0 to each
terminal row and charges elastic_weight·σ_k.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from stlcfs.assembly.layout import VariableLayout
from stlcfs.core.errors import ConicProgramError, DimensionMismatchError
from stlcfs.dynamics.model import Trajectory, dynamics_constraints, limit_constraints
from stlcfs.geometry.sdf import LinearizedObstacleConstraint, linearize_obstacles, signed_distance
from stlcfs.scenario.schemas import Scenario
from stlcfs.solver.schemas import ConeKind, ConicProgram, ConstraintBlock
from stlcfs.stl.robustness import MuChain, build_mu_chain, smooth_chain, window_robustness_exact

logger = logging.getLogger(__name__)


class Subproblem:
    """A built program together with what is needed to read its solution."""

    def __init__(
        self,
        program: ConicProgram,
        layout: VariableLayout,
        chains: List[MuChain],
        cfs: List[LinearizedObstacleConstraint],
        elastic: bool = False,
    ):
        self.program = program
        self.layout = layout
        self.chains = chains
        self.cfs = cfs
        self.elastic = elastic


def _sparse(rows, cols, vals, shape) -> sp.csr_matrix:
    return sp.csr_matrix((vals, (rows, cols)), shape=shape)


def _check_references(s: Scenario, reference: Trajectory, rho_ref, mu_ref) -> None:
    if reference.T != s.T:
        raise DimensionMismatchError(f"reference has T={reference.T}, scenario has T={s.T}")
    if len(rho_ref) != s.K or len(mu_ref) != s.K:
        raise DimensionMismatchError(
            f"references cover {len(rho_ref)} rho / {len(mu_ref)} mu goals, scenario has {s.K}"
        )
    for k, goal in enumerate(s.goals):
        if len(rho_ref[k]) != goal.length or len(mu_ref[k]) != goal.length:
            raise DimensionMismatchError(
                f"goal {k}: window {list(goal.window)} has {goal.length} steps, "
                f"references have {len(rho_ref[k])} rho and {len(mu_ref[k])} mu values"
            )


def _rho_cone_block(s: Scenario, layout: VariableLayout) -> ConstraintBlock:
    """(ε − ρ_k(t), x_t − h_k) ∈ SOC(4) for every goal and window step."""
    rows, cols, vals = [], [], []
    b: List[float] = []
    r = 0
    for k, goal in enumerate(s.goals):
        h = goal.center_array()
        rho_cols = layout.rho_slice(k)
        for i, t in enumerate(range(goal.tau_start, goal.tau_end + 1)):
            rows.append(r)
            cols.append(rho_cols.start + i)
            vals.append(1.0)
            b.append(goal.epsilon)
            for j in range(3):
                rows.append(r + 1 + j)
                cols.append(layout.x_col(t, j))
                vals.append(-1.0)
                b.append(-h[j])
            r += 4
    return ConstraintBlock(
        _sparse(rows, cols, vals, (r, layout.n)),
        np.asarray(b),
        [(ConeKind.SOC, 4)] * (r // 4),
        label="rho_soc",
    )


def _terminal_block(s: Scenario, layout: VariableLayout, chains: List[MuChain]) -> ConstraintBlock:
    """μ_k(τ_end) ≥ 0, or μ_k(τ_end) + σ_k ≥ 0 with σ_k ≥ 0 when elastic."""
    if not layout.elastic:
        blocks = [
            chain.terminal.padded(layout.n, layout.chain_offsets[k]) for k, chain in enumerate(chains)
        ]
        if not blocks:
            return ConstraintBlock(sp.csr_matrix((0, layout.n)), np.zeros(0), [], label="stl_terminal")
        return ConstraintBlock(
            sp.vstack([blk.A for blk in blocks], format="csr"),
            np.concatenate([blk.b for blk in blocks]),
            [(ConeKind.NONNEG, len(blocks))],
            label="stl_terminal",
        )
    rows, cols, vals = [], [], []
    K = s.K
    for k in range(K):
        rows += [k, k]
        cols += [layout.mu_end_col(k), layout.sigma_col(k)]
        vals += [-1.0, -1.0]
        rows.append(K + k)
        cols.append(layout.sigma_col(k))
        vals.append(-1.0)
    return ConstraintBlock(
        _sparse(rows, cols, vals, (2 * K, layout.n)),
        np.zeros(2 * K),
        [(ConeKind.NONNEG, 2 * K)],
        label="stl_terminal",
    )


def _cfs_block(layout: VariableLayout, cfs: List[LinearizedObstacleConstraint], margin: float) -> ConstraintBlock:
    """g·x_t + c ≥ margin for every (m, t)."""
    rows, cols, vals = [], [], []
    b = np.zeros(len(cfs))
    for r, lc in enumerate(cfs):
        for j in range(3):
            if lc.g[j] != 0.0:
                rows.append(r)
                cols.append(layout.x_col(lc.t, j))
                vals.append(-lc.g[j])
        b[r] = lc.c - margin
    return ConstraintBlock(
        _sparse(rows, cols, vals, (len(cfs), layout.n)), b, [(ConeKind.NONNEG, len(cfs))], label="cfs"
    )


def _hinge_block(layout: VariableLayout, cfs: List[LinearizedObstacleConstraint], d_safe: float) -> ConstraintBlock:
    """e ≥ 0 and e + g·x_t + c − d_safe ≥ 0 for every (m, t)."""
    n_cfs = len(cfs)
    rows, cols, vals = [], [], []
    b = np.zeros(2 * n_cfs)
    for r, lc in enumerate(cfs):
        e_col = layout.hinge_col(lc.m, lc.t)
        rows.append(r)
        cols.append(e_col)
        vals.append(-1.0)

        rr = n_cfs + r
        rows.append(rr)
        cols.append(e_col)
        vals.append(-1.0)
        for j in range(3):
            if lc.g[j] != 0.0:
                rows.append(rr)
                cols.append(layout.x_col(lc.t, j))
                vals.append(-lc.g[j])
        b[rr] = lc.c - d_safe
    return ConstraintBlock(
        _sparse(rows, cols, vals, (2 * n_cfs, layout.n)), b, [(ConeKind.NONNEG, 2 * n_cfs)], label="hinge"
    )


def build_subproblem(
    s: Scenario,
    reference: Trajectory,
    rho_ref: Sequence[np.ndarray],
    mu_ref: Sequence[np.ndarray],
    elastic: bool = False,
    w3_scale: float = 1.0,
) -> Subproblem:
    """
    Assemble the conic program linearized at a reference.

    Args:
        s: scenario
        reference: linearization point for the obstacle half-spaces
        rho_ref: per goal, ρ̄ over the window
        mu_ref: per goal, μ̄ over the window
        elastic: relax the STL terminal rows with penalized slack
        w3_scale: multiplier on the hinge weight (the infeasibility retry doubles it)

    Returns:
        Subproblem with program, layout, chains and the obstacle half-spaces
    """
    _check_references(s, reference, rho_ref, mu_ref)
    w, p = s.weights, s.params
    w3 = w.w3 * w3_scale
    with_hinge = w3 > 0 and s.M > 0
    layout = VariableLayout(
        s.T, [goal.window for goal in s.goals], s.M, with_hinge=with_hinge, elastic=elastic and s.K > 0
    )

    chains = [
        build_mu_chain(k, goal.window, rho_ref[k], mu_ref[k], p.alpha) for k, goal in enumerate(s.goals)
    ]
    cfs = linearize_obstacles(reference, s.obstacles)

    blocks: List[ConstraintBlock] = [dynamics_constraints(s).padded(layout.n)]
    for k, chain in enumerate(chains):
        if chain.equalities.rows:
            blocks.append(chain.equalities.padded(layout.n, layout.chain_offsets[k]))
    blocks += [blk.padded(layout.n) for blk in limit_constraints(s, shrink=p.limit_shrink)]
    if s.K:
        blocks.append(_rho_cone_block(s, layout))
        blocks.append(_terminal_block(s, layout, chains))
    if cfs:
        blocks.append(_cfs_block(layout, cfs, p.cfs_margin))
        if with_hinge:
            blocks.append(_hinge_block(layout, cfs, w.d_safe))

    diag = np.zeros(layout.n)
    diag[layout.a] = 2.0 * w.w2
    P = sp.diags(diag, format="csc")
    q = np.zeros(layout.n)
    for k, goal in enumerate(s.goals):
        q[layout.mu_end_col(k)] -= w.w1 * goal.priority
    if with_hinge:
        q[layout.hinge] = w3
    if layout.elastic:
        q[layout.sigma] = p.elastic_weight

    program = ConicProgram.from_blocks(P, q, blocks)
    logger.debug(
        f"Built subproblem: n={program.n}, m={program.m}, "
        f"rows={row_counts(program)}"
    )
    return Subproblem(program, layout, chains, cfs, elastic=layout.elastic)


def hinge_penalty(s: Scenario, traj: Trajectory) -> float:
    """Σ_{m,t} max(0, d_safe − φ_m(x_t))."""
    d_safe = s.weights.d_safe
    total = 0.0
    for box in s.obstacles:
        for x_t in traj.x:
            total += max(0.0, d_safe - signed_distance(x_t, box))
    return total


def control_effort(traj: Trajectory) -> float:
    return float(np.sum(traj.a ** 2))


def objective_value_exact(s: Scenario, traj: Trajectory) -> float:
    """
    w1·(−Σ_k p_k·max_window ρ_k) + w2·Σ‖a‖² + w3·Σ hinge, with no smoothing
    and no linearization.
    """
    w = s.weights
    stl = -sum(goal.priority * window_robustness_exact(traj, goal) for goal in s.goals)
    return w.w1 * stl + w.w2 * control_effort(traj) + w.w3 * hinge_penalty(s, traj)


def surrogate_objective(s: Scenario, reference: Trajectory, rho_ref: Sequence[np.ndarray]) -> float:
    """Objective with the window max replaced by the smooth running max of ρ̄."""
    w = s.weights
    stl = -sum(
        goal.priority * smooth_chain(rho_ref[k], s.params.alpha)[-1] for k, goal in enumerate(s.goals)
    )
    return w.w1 * stl + w.w2 * control_effort(reference) + w.w3 * hinge_penalty(s, reference)


def linearized_objective(
    s: Scenario, reference: Trajectory, rho_ref: Sequence[np.ndarray], mu_ref: Sequence[np.ndarray]
) -> float:
    """
    The convexified objective evaluated at the reference itself: μ from the
    linearized chains applied to ρ̄, hinge from the tangent planes at x̄.
    """
    w = s.weights
    stl = 0.0
    for k, goal in enumerate(s.goals):
        chain = build_mu_chain(k, goal.window, rho_ref[k], mu_ref[k], s.params.alpha)
        stl -= goal.priority * chain.evaluate(rho_ref[k])[-1]
    hinge = sum(
        max(0.0, w.d_safe - lc.value(reference.x[lc.t - 1]))
        for lc in linearize_obstacles(reference, s.obstacles)
    )
    return w.w1 * stl + w.w2 * control_effort(reference) + w.w3 * hinge


def audit_convexity(prog: ConicProgram, chains: Sequence[MuChain]) -> List[str]:
    """
    Structural convexity checks of an assembled program. Returns a list of
    problems; empty means the program is a valid convex conic program and
    every terminal μ is a nonnegative combination of the ρ variables.
    """
    problems: List[str] = []
    try:
        prog.validate()
    except ConicProgramError as e:
        problems.append(str(e))
    for chain in chains:
        weights, _ = chain.unrolled_terminal_coefficients()
        if np.any(weights < 0):
            problems.append(f"goal {chain.k}: negative unrolled coefficient {float(weights.min())}")
        if np.any(chain.c_rho <= 0) or np.any(chain.c_mu <= 0):
            problems.append(f"goal {chain.k}: smooth-max coefficient outside (0, 1)")
    return problems


def rho_relaxation_gaps(
    s: Scenario, sub: Subproblem, z: np.ndarray, min_weight: float = 1e-3
) -> List[np.ndarray]:
    """
    Slack of each ρ cone row, (ε − ‖x_t − h‖) − ρ, at a solution z.

    Entries whose unrolled terminal weight is below min_weight carry no
    objective pressure and are reported as nan.
    """
    traj = sub.layout.trajectory(z)
    gaps: List[np.ndarray] = []
    for k, goal in enumerate(s.goals):
        x = traj.x[goal.tau_start - 1: goal.tau_end]
        exact = goal.epsilon - np.linalg.norm(x - goal.center_array(), axis=1)
        gap = exact - sub.layout.rho(z, k)
        weights, _ = sub.chains[k].unrolled_terminal_coefficients()
        gap[weights < min_weight] = np.nan
        gaps.append(gap)
    return gaps


def row_counts(prog: ConicProgram) -> dict:
    """Row count per block label."""
    return {name: stop - start for name, (start, stop) in prog.row_labels.items()}
