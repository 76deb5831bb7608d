"""
Data types of the embedded conic solver.

Every constraint row is written in the standard form  A z + s = b,  s ∈ K,
where K is an ordered product of zero cones, nonnegative cones and
second-order cones. A second-order cone of dimension d holds (t, u) with
u ∈ R^(d-1) and ‖u‖₂ ≤ t.
"""

from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from stlcfs.core.errors import ConicProgramError


class ConeKind(str, Enum):
    ZERO = "zero"
    NONNEG = "nonneg"
    SOC = "soc"


Cone = Tuple[ConeKind, int]


def merge_cones(cones: Sequence[Cone]) -> List[Cone]:
    """
    Merge adjacent zero/nonneg cones; SOC blocks stay separate.
    """
    merged: List[Cone] = []
    for kind, dim in cones:
        if dim == 0:
            continue
        if merged and kind != ConeKind.SOC and merged[-1][0] == kind:
            merged[-1] = (kind, merged[-1][1] + dim)
        else:
            merged.append((kind, dim))
    return merged


class ConstraintBlock:
    """
    A group of rows  A z + s = b,  s ∈ cones, over some column space.

    Builders in dynamics/stl/geometry produce blocks over their own local
    columns; assembly places them into the full variable layout.
    """

    def __init__(self, A: sp.spmatrix, b: np.ndarray, cones: Sequence[Cone], label: str = ""):
        self.A = sp.csr_matrix(A)
        self.b = np.asarray(b, dtype=float).reshape(-1)
        self.cones = merge_cones(cones)
        self.label = label
        rows = sum(dim for _, dim in self.cones)
        if rows != self.A.shape[0] or rows != self.b.shape[0]:
            raise ConicProgramError(
                f"Block '{label}': cone dims sum to {rows}, A has {self.A.shape[0]} rows, b has {self.b.shape[0]}"
            )

    @property
    def rows(self) -> int:
        return self.A.shape[0]

    def slack(self, z: np.ndarray) -> np.ndarray:
        """s = b - A z; the block is satisfied when s lies in its cones."""
        return self.b - self.A @ np.asarray(z, dtype=float)

    def residual(self, z: np.ndarray) -> np.ndarray:
        """A z - b, meaningful for equality (zero-cone) blocks."""
        return self.A @ np.asarray(z, dtype=float) - self.b

    def violation(self, z: np.ndarray) -> float:
        """Largest distance of a slack entry from its cone (0 when satisfied)."""
        from stlcfs.solver.cones import cone_project

        s = self.slack(z)
        if s.size == 0:
            return 0.0
        return float(np.max(np.abs(s - cone_project(s, self.cones))))

    def is_satisfied(self, z: np.ndarray, tol: float = 1e-9) -> bool:
        return self.violation(z) <= tol

    def padded(self, n_cols: int, offset: int = 0) -> "ConstraintBlock":
        """Same rows with columns shifted by offset inside an n_cols-wide space."""
        A = self.A.tocoo()
        moved = sp.csr_matrix((A.data, (A.row, A.col + offset)), shape=(A.shape[0], n_cols))
        return ConstraintBlock(moved, self.b, self.cones, self.label)


class ConicProgram:
    """
    minimize ½ zᵀPz + qᵀz  subject to  A z + s = b,  s ∈ K.
    """

    def __init__(
        self,
        P: sp.spmatrix,
        q: np.ndarray,
        A: sp.spmatrix,
        b: np.ndarray,
        cones: Sequence[Cone],
        row_labels: Optional[Dict[str, Tuple[int, int]]] = None,
    ):
        self.P = sp.csc_matrix(P)
        self.q = np.asarray(q, dtype=float).reshape(-1)
        self.A = sp.csc_matrix(A)
        self.b = np.asarray(b, dtype=float).reshape(-1)
        self.cones: List[Cone] = [(ConeKind(kind), int(dim)) for kind, dim in cones]
        self.row_labels: Dict[str, Tuple[int, int]] = dict(row_labels or {})

    @classmethod
    def from_blocks(cls, P: sp.spmatrix, q: np.ndarray, blocks: Sequence[ConstraintBlock]) -> "ConicProgram":
        """Stack blocks (already in full column space) in the given order."""
        n = P.shape[0]
        nonempty = [blk for blk in blocks if blk.rows > 0]
        if nonempty:
            A = sp.vstack([blk.A for blk in nonempty], format="csc")
            b = np.concatenate([blk.b for blk in nonempty])
        else:
            A = sp.csc_matrix((0, n))
            b = np.zeros(0)
        cones: List[Cone] = []
        labels: Dict[str, Tuple[int, int]] = {}
        row = 0
        for blk in nonempty:
            cones.extend(blk.cones)
            if blk.label:
                start, _ = labels.get(blk.label, (row, row))
                labels[blk.label] = (start, row + blk.rows)
            row += blk.rows
        return cls(P, q, A, b, merge_cones(cones), labels)

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def rows(self, label: str) -> slice:
        start, stop = self.row_labels[label]
        return slice(start, stop)

    def objective(self, z: np.ndarray) -> float:
        z = np.asarray(z, dtype=float)
        return float(0.5 * z @ (self.P @ z) + self.q @ z)

    def validate(self, psd_samples: int = 32) -> None:
        """
        Check the structural invariants; raises ConicProgramError.
        PSD-ness is sampled with a fixed seed, so the check is deterministic.
        """
        n = self.n
        if self.P.shape != (n, n):
            raise ConicProgramError(f"P must be square, got {self.P.shape}")
        if self.q.shape != (n,):
            raise ConicProgramError(f"q has length {self.q.shape[0]}, expected {n}")
        if self.A.shape[1] != n:
            raise ConicProgramError(f"A has {self.A.shape[1]} columns, expected {n}")
        if self.b.shape != (self.m,):
            raise ConicProgramError(f"b has length {self.b.shape[0]}, expected {self.m}")
        total = sum(dim for _, dim in self.cones)
        if total != self.m:
            raise ConicProgramError(f"cone dimensions sum to {total}, A has {self.m} rows")
        for kind, dim in self.cones:
            if kind == ConeKind.SOC and dim < 2:
                raise ConicProgramError(f"second-order cone of dimension {dim} < 2")
        asym = abs(self.P - self.P.T)
        if asym.nnz and asym.max() > 1e-12 * max(1.0, abs(self.P).max()):
            raise ConicProgramError("P is not symmetric")
        if n:
            rng = np.random.default_rng(0)
            for _ in range(psd_samples):
                w = rng.standard_normal(n)
                if w @ (self.P @ w) < -1e-10 * (w @ w) * max(1.0, abs(self.P).max()):
                    raise ConicProgramError("P is not positive semidefinite")


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    MAX_ITERS = "max_iters"
    INFEASIBLE_DETECTED = "infeasible_detected"
    NUMERICAL_FAILURE = "numerical_failure"


class SolveResult:
    """Outcome of one conic solve, in the unscaled problem's units."""

    def __init__(
        self,
        status: SolveStatus,
        z: np.ndarray,
        s: np.ndarray,
        y: np.ndarray,
        primal_residual: float,
        dual_residual: float,
        duality_gap: float,
        iterations: int,
        solve_time: float,
        objective: float,
        infeasibility: Optional[str] = None,
    ):
        self.status = status
        self.z = z
        self.s = s
        self.y = y
        self.primal_residual = primal_residual
        self.dual_residual = dual_residual
        self.duality_gap = duality_gap
        self.iterations = iterations
        self.solve_time = solve_time
        self.objective = objective
        self.infeasibility = infeasibility

    @property
    def ok(self) -> bool:
        return self.status == SolveStatus.OPTIMAL

    def __repr__(self) -> str:
        return (
            f"SolveResult(status={self.status.value}, obj={self.objective:.6g}, "
            f"iters={self.iterations}, rp={self.primal_residual:.2e}, rd={self.dual_residual:.2e}, "
            f"gap={self.duality_gap:.2e})"
        )
