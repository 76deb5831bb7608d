"""
Operator-splitting (ADMM) solver for conic-quadratic programs.

    minimize ½ zᵀPz + qᵀz   subject to   A z + s = b,  s ∈ K

Each iteration solves one quasi-definite KKT system with a cached sparse
factorization, projects onto K and updates the dual. The dual y lives in the
polar cone of K, so optimality reads  P z + q − Aᵀ y = 0,  sᵀy = 0.

Termination uses unscaled residuals:
    ‖A z + s − b‖∞ ≤ tol·(1 + ‖b‖∞)
    ‖P z + q − Aᵀy‖∞ ≤ tol·(1 + ‖q‖∞)
    |zᵀPz + qᵀz − bᵀy| ≤ tol·(1 + |primal obj| + |dual obj|)
Everything is deterministic: the step parameter only changes at fixed check
iterations and never depends on wall-clock time.
"""

import logging
import time
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from stlcfs.core.settings import (
    ADMM_ADAPT_THRESHOLD,
    ADMM_ALPHA,
    ADMM_CHECK_EVERY,
    ADMM_EPS_INFEASIBLE,
    ADMM_RHO,
    ADMM_RHO_EQ_SCALE,
    ADMM_RHO_MAX,
    ADMM_RHO_MIN,
    ADMM_SCALING_ITERS,
    ADMM_SIGMA,
)
from stlcfs.solver.cones import ConeIndex
from stlcfs.solver.scaling import ScaledProgram, equilibrate
from stlcfs.solver.schemas import ConicProgram, SolveResult, SolveStatus

logger = logging.getLogger(__name__)


class AdmmOptions:
    """Tuning knobs of the ADMM iteration; the defaults suit every program built here."""

    def __init__(
        self,
        rho: float = ADMM_RHO,
        sigma: float = ADMM_SIGMA,
        alpha: float = ADMM_ALPHA,
        rho_eq_scale: float = ADMM_RHO_EQ_SCALE,
        adaptive_rho: bool = True,
        check_every: int = ADMM_CHECK_EVERY,
        scaling_iters: int = ADMM_SCALING_ITERS,
        eps_infeasible: float = ADMM_EPS_INFEASIBLE,
    ):
        self.rho = rho
        self.sigma = sigma
        self.alpha = alpha
        self.rho_eq_scale = rho_eq_scale
        self.adaptive_rho = adaptive_rho
        self.check_every = check_every
        self.scaling_iters = scaling_iters
        self.eps_infeasible = eps_infeasible


def _inf_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v))) if v.size else 0.0


class _Kkt:
    """Factorized [[P + σI, Aᵀ], [A, −diag(1/ρ)]] of the scaled program."""

    def __init__(self, sc: ScaledProgram, sigma: float, rho_vec: np.ndarray):
        n = sc.P.shape[0]
        top = sc.P + sigma * sp.identity(n, format="csc")
        K = sp.bmat([[top, sc.A.T], [sc.A, -sp.diags(1.0 / rho_vec)]], format="csc")
        self.n = n
        self.lu = splu(K)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return self.lu.solve(rhs)


def _rho_vector(index: ConeIndex, rho: float, rho_eq_scale: float) -> np.ndarray:
    rho_vec = np.full(index.m, rho)
    rho_vec[index.zero] = rho * rho_eq_scale
    return rho_vec


def solve(
    prog: ConicProgram,
    tol: float = 1e-6,
    max_iters: int = 50_000,
    warm_start: Optional[Union[np.ndarray, SolveResult]] = None,
    options: Optional[AdmmOptions] = None,
) -> SolveResult:
    """
    Solve a conic-quadratic program.

    Args:
        prog: the program; validated before solving
        tol: relative tolerance on primal residual, dual residual and gap
        max_iters: iteration cap
        warm_start: a primal vector z, or a previous SolveResult whose
            (z, s, y) iterates all seed the iteration

    Returns:
        SolveResult in the program's original units
    """
    opts = options or AdmmOptions()
    start = time.perf_counter()
    prog.validate()

    n, m = prog.n, prog.m
    index = ConeIndex(prog.cones)
    sc = equilibrate(prog, index, opts.scaling_iters)

    rho = opts.rho
    rho_vec = _rho_vector(index, rho, opts.rho_eq_scale)
    kkt = _Kkt(sc, opts.sigma, rho_vec)

    x = np.zeros(n)
    s = np.zeros(m)
    y = np.zeros(m)
    if isinstance(warm_start, SolveResult):
        if warm_start.z.shape == (n,) and warm_start.s.shape == (m,) and warm_start.y.shape == (m,):
            x = sc.scale_primal(warm_start.z)
            s = index.project(sc.scale_slack(warm_start.s))
            y = sc.scale_dual(warm_start.y)
        else:
            logger.debug("Warm start shape does not match program; starting cold")
    elif warm_start is not None:
        z0 = np.asarray(warm_start, dtype=float)
        if z0.shape == (n,):
            x = sc.scale_primal(z0)
            s = index.project(sc.b - sc.A @ x)

    b_norm = _inf_norm(prog.b)
    q_norm = _inf_norm(prog.q)
    eps_p = tol * (1.0 + b_norm)
    eps_d = tol * (1.0 + q_norm)

    status = SolveStatus.MAX_ITERS
    infeasibility: Optional[str] = None
    r_p = r_d = gap = float("inf")
    pobj = float("nan")
    iteration = 0
    alpha = opts.alpha

    for iteration in range(1, max_iters + 1):
        x_prev = x
        y_prev = y

        rhs = np.concatenate([opts.sigma * x - sc.q, sc.b - s + y / rho_vec])
        sol = kkt.solve(rhs)
        x_tilde = sol[:n]
        nu = sol[n:]
        s_tilde = s - (nu + y) / rho_vec

        x = alpha * x_tilde + (1.0 - alpha) * x_prev
        s_relaxed = alpha * s_tilde + (1.0 - alpha) * s
        s = index.project(s_relaxed + y / rho_vec)
        y = y + rho_vec * (s_relaxed - s)

        if iteration % opts.check_every != 0 and iteration != max_iters:
            continue

        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(s)) and np.all(np.isfinite(y))):
            status = SolveStatus.NUMERICAL_FAILURE
            logger.warning(f"Non-finite iterate at iteration {iteration}")
            break

        Ax = sc.A @ x
        Px = sc.P @ x
        Aty = sc.A.T @ y
        rp_hat = Ax + s - sc.b
        rd_hat = Px + sc.q - Aty

        z_u = sc.unscale_primal(x)
        y_u = sc.unscale_dual(y)
        r_p = _inf_norm(rp_hat / sc.E) if m else 0.0
        r_d = _inf_norm(rd_hat / (sc.c * sc.D)) if n else 0.0
        zPz = float(z_u @ (prog.P @ z_u))
        pobj = 0.5 * zPz + float(prog.q @ z_u)
        dobj = -0.5 * zPz + float(prog.b @ y_u)
        gap = abs(pobj - dobj)

        logger.debug(
            f"ADMM iter {iteration}: rp={r_p:.3e} rd={r_d:.3e} gap={gap:.3e} rho={rho:.3e}"
        )

        primal_ok = r_p <= eps_p
        dual_ok = r_d <= eps_d
        if primal_ok and dual_ok and gap <= tol * (1.0 + abs(pobj) + abs(dobj)):
            status = SolveStatus.OPTIMAL
            break

        if not primal_ok and _primal_infeasible(prog, sc, index, y - y_prev, opts.eps_infeasible):
            status = SolveStatus.INFEASIBLE_DETECTED
            infeasibility = "primal"
            break
        if not dual_ok and _dual_infeasible(prog, sc, index, x - x_prev, opts.eps_infeasible):
            status = SolveStatus.INFEASIBLE_DETECTED
            infeasibility = "dual"
            break

        if opts.adaptive_rho and m:
            rp_rel = _inf_norm(rp_hat) / max(_inf_norm(Ax), _inf_norm(s), _inf_norm(sc.b), 1e-10)
            rd_rel = _inf_norm(rd_hat) / max(_inf_norm(Px), _inf_norm(Aty), _inf_norm(sc.q), 1e-10)
            new_rho = float(np.clip(rho * np.sqrt(rp_rel / max(rd_rel, 1e-10)), ADMM_RHO_MIN, ADMM_RHO_MAX))
            if new_rho > rho * ADMM_ADAPT_THRESHOLD or new_rho < rho / ADMM_ADAPT_THRESHOLD:
                rho = new_rho
                rho_vec = _rho_vector(index, rho, opts.rho_eq_scale)
                kkt = _Kkt(sc, opts.sigma, rho_vec)
                logger.debug(f"ADMM iter {iteration}: rho updated to {rho:.3e}")

    z_u = sc.unscale_primal(x)
    result = SolveResult(
        status=status,
        z=z_u,
        s=sc.unscale_slack(s),
        y=sc.unscale_dual(y),
        primal_residual=r_p,
        dual_residual=r_d,
        duality_gap=gap,
        iterations=iteration,
        solve_time=time.perf_counter() - start,
        objective=prog.objective(z_u) if np.all(np.isfinite(z_u)) else float("nan"),
        infeasibility=infeasibility,
    )
    logger.info(
        f"Solved n={n} m={m}: {status.value} after {iteration} iterations "
        f"in {result.solve_time:.3f}s (obj={result.objective:.6g})"
    )
    return result


def _primal_infeasible(
    prog: ConicProgram, sc: ScaledProgram, index: ConeIndex, dy_hat: np.ndarray, eps: float
) -> bool:
    """
    Farkas certificate: Aᵀδy = 0, δy in the polar cone, bᵀδy > 0.
    """
    dy = sc.unscale_dual(dy_hat)
    size = _inf_norm(dy)
    if size < 1e-30:
        return False
    if _inf_norm(prog.A.T @ dy) > eps * size:
        return False
    # δy ∈ K°  ⇔  −δy ∈ K*
    if _inf_norm(-dy - index.project_dual(-dy)) > eps * size:
        return False
    return float(prog.b @ dy) > eps * size


def _dual_infeasible(
    prog: ConicProgram, sc: ScaledProgram, index: ConeIndex, dx_hat: np.ndarray, eps: float
) -> bool:
    """
    Unboundedness certificate: Pδx = 0, qᵀδx < 0, −Aδx ∈ K.
    """
    dx = sc.unscale_primal(dx_hat)
    size = _inf_norm(dx)
    if size < 1e-30:
        return False
    if _inf_norm(prog.P @ dx) > eps * size:
        return False
    if float(prog.q @ dx) >= -eps * size:
        return False
    w = -(prog.A @ dx)
    return _inf_norm(w - index.project(w)) <= eps * size
