"""
Ruiz equilibration of a conic program.

The scaled problem is
    P̂ = c·D P D,  q̂ = c·D q,  Â = E A D,  b̂ = E b
with diagonal D (columns) and E (rows) and a cost scale c. Rows of one
second-order cone share a single scale factor so that E·s stays in the cone.
"""

import logging

import numpy as np
import scipy.sparse as sp

from stlcfs.core.settings import SCALING_MAX_NORM, SCALING_MIN_NORM
from stlcfs.solver.cones import ConeIndex
from stlcfs.solver.schemas import ConicProgram

logger = logging.getLogger(__name__)


def _limit(norms: np.ndarray) -> np.ndarray:
    norms = np.where(norms < SCALING_MIN_NORM, 1.0, norms)
    return np.minimum(norms, SCALING_MAX_NORM)


def _col_inf_norms(M: sp.spmatrix) -> np.ndarray:
    if M.shape[0] == 0:
        return np.zeros(M.shape[1])
    return np.asarray(abs(M).max(axis=0).todense()).reshape(-1)


def _row_inf_norms(M: sp.spmatrix) -> np.ndarray:
    if M.shape[1] == 0:
        return np.zeros(M.shape[0])
    return np.asarray(abs(M).max(axis=1).todense()).reshape(-1)


class ScaledProgram:
    """A scaled copy of a ConicProgram plus the factors to undo the scaling."""

    def __init__(self, P, q, A, b, D, E, c):
        self.P = P
        self.q = q
        self.A = A
        self.b = b
        self.D = D
        self.E = E
        self.c = c

    def unscale_primal(self, x_hat: np.ndarray) -> np.ndarray:
        return self.D * x_hat

    def unscale_slack(self, s_hat: np.ndarray) -> np.ndarray:
        return s_hat / self.E

    def unscale_dual(self, y_hat: np.ndarray) -> np.ndarray:
        return self.E * y_hat / self.c

    def scale_primal(self, x: np.ndarray) -> np.ndarray:
        return x / self.D

    def scale_slack(self, s: np.ndarray) -> np.ndarray:
        return self.E * s

    def scale_dual(self, y: np.ndarray) -> np.ndarray:
        return self.c * y / self.E


def equilibrate(prog: ConicProgram, index: ConeIndex, iterations: int) -> ScaledProgram:
    """
    Alternate column and row infinity-norm equilibration, then scale the cost.
    """
    n, m = prog.n, prog.m
    P = sp.csc_matrix(prog.P, copy=True)
    A = sp.csc_matrix(prog.A, copy=True)
    q = prog.q.copy()
    b = prog.b.copy()
    D = np.ones(n)
    E = np.ones(m)
    c = 1.0

    for _ in range(iterations):
        col = np.maximum(_col_inf_norms(P), _col_inf_norms(A))
        d = 1.0 / np.sqrt(_limit(col))
        e = 1.0 / np.sqrt(_limit(_row_inf_norms(A))) if m else np.ones(0)
        for block in index.soc_blocks:
            e[block] = np.mean(e[block])

        Dm = sp.diags(d)
        P = Dm @ P @ Dm
        A = sp.diags(e) @ A @ Dm
        q = d * q
        b = e * b
        D *= d
        E *= e

        mean_col = float(np.mean(_col_inf_norms(P))) if n else 0.0
        q_norm = float(np.max(np.abs(q))) if n else 0.0
        gamma = 1.0 / float(_limit(np.array([max(mean_col, q_norm)]))[0])
        P = gamma * P
        q = gamma * q
        c *= gamma

    logger.debug(
        f"Equilibrated: D in [{D.min() if n else 1:.2e}, {D.max() if n else 1:.2e}], "
        f"E in [{E.min() if m else 1:.2e}, {E.max() if m else 1:.2e}], c={c:.2e}"
    )
    return ScaledProgram(sp.csc_matrix(P), q, sp.csc_matrix(A), b, D, E, c)
