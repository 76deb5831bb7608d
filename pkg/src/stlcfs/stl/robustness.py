"""
Robustness of "eventually reach goal k within [τ_start, τ_end]".

The predicate robustness at step t is ρ_k(t) = ε_k − ‖x_t − h_k‖ and the
window robustness is its maximum over the window. The optimizer replaces the
max with a running smooth maximum

    μ(τ_start) = ρ(τ_start)
    μ(t)       = G(μ(t−1), ρ(t)),   G(a, b) = ½(a + b + √((a − b)² + α²))

linearized about reference values, which turns the chain into affine
equalities in (ρ, μ).
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from stlcfs.core.errors import DimensionMismatchError
from stlcfs.scenario.schemas import Goal
from stlcfs.solver.schemas import ConeKind, ConstraintBlock

logger = logging.getLogger(__name__)


def rho_exact(x_t: np.ndarray, goal: Goal) -> float:
    """ε − distance to the goal center; nonnegative inside the goal ball."""
    return float(goal.epsilon - np.linalg.norm(np.asarray(x_t, dtype=float) - goal.center_array()))


def rho_window(traj, goal: Goal) -> np.ndarray:
    """rho_exact at every step of the goal window, in step order."""
    x = np.asarray(traj.x, dtype=float)[goal.tau_start - 1: goal.tau_end]
    return goal.epsilon - np.linalg.norm(x - goal.center_array(), axis=1)


def window_robustness_exact(traj, goal: Goal) -> float:
    """Maximum of rho_exact over the goal window."""
    return float(np.max(rho_window(traj, goal)))


def smooth_max(mu_prev, rho, alpha: float):
    """
    G(μ, ρ, α) = ½(μ + ρ + √((μ − ρ)² + α²)), evaluated as
    max(μ, ρ) + ½α²/(r + |μ − ρ|) to avoid cancellation. Accepts arrays.
    """
    mu_prev = np.asarray(mu_prev, dtype=float)
    rho = np.asarray(rho, dtype=float)
    gap = np.abs(mu_prev - rho)
    r = np.hypot(gap, alpha)
    value = np.maximum(mu_prev, rho) + 0.5 * alpha * alpha / (r + gap)
    return float(value) if value.ndim == 0 else value


def smooth_max_coeffs(mu_ref: float, rho_ref: float, alpha: float) -> Tuple[float, float, float]:
    """
    Tangent of G at (μ̄, ρ̄): G ≈ c_mu·μ + c_rho·ρ + c_0.

    The smaller coefficient is computed in closed form and the larger one as
    its complement, so c_mu + c_rho = 1 holds to rounding and both stay in (0, 1).

    Returns:
        (c_mu, c_rho, c_0)
    """
    d = float(mu_ref) - float(rho_ref)
    r = float(np.hypot(d, alpha))
    small = 0.5 * alpha * alpha / (r * (r + abs(d)))
    if d > 0:
        c_rho = small
        c_mu = 1.0 - c_rho
    elif d < 0:
        c_mu = small
        c_rho = 1.0 - c_mu
    else:
        c_mu = c_rho = 0.5
    c_0 = smooth_max(mu_ref, rho_ref, alpha) - c_mu * mu_ref - c_rho * rho_ref
    return c_mu, c_rho, c_0


def smooth_chain(rho: Sequence[float], alpha: float) -> np.ndarray:
    """The exact smooth running max μ over a window of ρ values."""
    rho = np.asarray(rho, dtype=float)
    mu = np.empty_like(rho)
    if rho.size == 0:
        return mu
    mu[0] = rho[0]
    for i in range(1, rho.size):
        mu[i] = smooth_max(mu[i - 1], rho[i], alpha)
    return mu


class MuChain:
    """
    Linearized μ recursion of one goal over its own local columns

        [ρ_0 … ρ_{L−1}, μ_1 … μ_{L−1}]

    where index 0 is τ_start. μ_0 is not a column: it is ρ_0.
    """

    def __init__(
        self,
        k: int,
        window: Tuple[int, int],
        c_mu: np.ndarray,
        c_rho: np.ndarray,
        c0: np.ndarray,
    ):
        self.k = k
        self.window = window
        self.length = window[1] - window[0] + 1
        self.c_mu = c_mu
        self.c_rho = c_rho
        self.c0 = c0
        self.equalities = self._equality_block()
        self.terminal = self._terminal_block()

    @property
    def n_local(self) -> int:
        return 2 * self.length - 1

    def rho_col(self, i: int) -> int:
        return i

    def mu_col(self, i: int) -> int:
        """Local column of μ_i; μ_0 shares ρ_0's column."""
        return 0 if i == 0 else self.length + i - 1

    @property
    def terminal_col(self) -> int:
        return self.mu_col(self.length - 1)

    def _equality_block(self) -> ConstraintBlock:
        L = self.length
        rows, cols, vals = [], [], []
        for i in range(1, L):
            r = i - 1
            # μ_i − c_mu·μ_{i−1} − c_rho·ρ_i = c0
            rows += [r, r, r]
            cols += [self.mu_col(i), self.mu_col(i - 1), self.rho_col(i)]
            vals += [1.0, -self.c_mu[r], -self.c_rho[r]]
        A = sp.csr_matrix((vals, (rows, cols)), shape=(L - 1, self.n_local))
        return ConstraintBlock(A, np.asarray(self.c0, dtype=float), [(ConeKind.ZERO, L - 1)], label="mu_chain")

    def _terminal_block(self) -> ConstraintBlock:
        # μ_end ≥ 0  as  s = 0 − (−μ_end) ∈ R+
        A = sp.csr_matrix(([-1.0], ([0], [self.terminal_col])), shape=(1, self.n_local))
        return ConstraintBlock(A, np.zeros(1), [(ConeKind.NONNEG, 1)], label="stl_terminal")

    def evaluate(self, rho: Sequence[float]) -> np.ndarray:
        """μ values (length L) produced by the linearized recursion from ρ."""
        rho = np.asarray(rho, dtype=float)
        mu = np.empty(self.length)
        mu[0] = rho[0]
        for i in range(1, self.length):
            mu[i] = self.c_mu[i - 1] * mu[i - 1] + self.c_rho[i - 1] * rho[i] + self.c0[i - 1]
        return mu

    def unrolled_terminal_coefficients(self) -> Tuple[np.ndarray, float]:
        """
        μ_end written as w·ρ + const by substituting the recursion.

        Returns:
            (w of length L, const)
        """
        w = np.zeros(self.length)
        w[0] = 1.0
        const = 0.0
        for i in range(1, self.length):
            w *= self.c_mu[i - 1]
            w[i] += self.c_rho[i - 1]
            const = self.c_mu[i - 1] * const + self.c0[i - 1]
        return w, const

    def __repr__(self) -> str:
        return f"MuChain(k={self.k}, window={list(self.window)}, rows={self.length - 1})"


def build_mu_chain(
    k: int,
    window: Tuple[int, int],
    rho_refs: Sequence[float],
    mu_refs: Sequence[float],
    alpha: float,
) -> MuChain:
    """
    Linearize the smooth running max of goal k about (ρ̄, μ̄).

    Args:
        k: goal index
        window: (τ_start, τ_end), 1-based and inclusive
        rho_refs: ρ̄ over the window (length L)
        mu_refs: μ̄ over the window (length L); μ̄[0] is ignored in favour of ρ̄[0]
        alpha: smoothing parameter

    Returns:
        MuChain with L − 1 equality rows and one terminal row
    """
    L = window[1] - window[0] + 1
    rho_refs = np.asarray(rho_refs, dtype=float)
    mu_refs = np.asarray(mu_refs, dtype=float)
    if rho_refs.shape != (L,) or mu_refs.shape != (L,):
        raise DimensionMismatchError(
            f"goal {k}: window {list(window)} needs {L} reference values, "
            f"got rho {rho_refs.shape[0]} and mu {mu_refs.shape[0]}"
        )
    c_mu = np.zeros(L - 1)
    c_rho = np.zeros(L - 1)
    c0 = np.zeros(L - 1)
    prev = rho_refs[0]
    for i in range(1, L):
        c_mu[i - 1], c_rho[i - 1], c0[i - 1] = smooth_max_coeffs(prev, rho_refs[i], alpha)
        prev = mu_refs[i]
    return MuChain(k, (int(window[0]), int(window[1])), c_mu, c_rho, c0)


class RobustnessTrace:
    """
    Per-goal ρ and μ values over each goal window. Index i of goal k's arrays
    is step window[0] + i.
    """

    def __init__(self, windows: List[Tuple[int, int]], rho: List[np.ndarray], mu: List[np.ndarray]):
        self.windows = windows
        self.rho = rho
        self.mu = mu

    @property
    def K(self) -> int:
        return len(self.windows)

    def steps(self, k: int) -> range:
        return range(self.windows[k][0], self.windows[k][1] + 1)

    def rows(self):
        """(t, k, rho, mu) tuples in goal-major order."""
        for k in range(self.K):
            for i, t in enumerate(self.steps(k)):
                yield t, k, float(self.rho[k][i]), float(self.mu[k][i])

    @classmethod
    def from_trajectory(cls, traj, goals: Sequence[Goal], mu: Optional[List[np.ndarray]] = None) -> "RobustnessTrace":
        rho = [rho_window(traj, goal) for goal in goals]
        windows = [(goal.tau_start, goal.tau_end) for goal in goals]
        return cls(windows, rho, mu if mu is not None else [np.full(len(r), np.nan) for r in rho])
