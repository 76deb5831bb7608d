"""
Euclidean projections onto products of zero, nonnegative and second-order cones.
"""

from typing import Dict, List, Sequence

import numpy as np

from stlcfs.solver.schemas import Cone, ConeKind


class ConeIndex:
    """
    Precomputed row indices of a cone product so that projection is a handful
    of vectorized numpy operations. SOC blocks are grouped by dimension.
    """

    def __init__(self, cones: Sequence[Cone]):
        zero: List[np.ndarray] = []
        nonneg: List[np.ndarray] = []
        soc: Dict[int, List[np.ndarray]] = {}
        soc_blocks: List[np.ndarray] = []
        row = 0
        for kind, dim in cones:
            idx = np.arange(row, row + dim)
            if kind == ConeKind.ZERO:
                zero.append(idx)
            elif kind == ConeKind.NONNEG:
                nonneg.append(idx)
            else:
                soc.setdefault(dim, []).append(idx)
                soc_blocks.append(idx)
            row += dim
        self.m = row
        self.zero = np.concatenate(zero) if zero else np.zeros(0, dtype=int)
        self.nonneg = np.concatenate(nonneg) if nonneg else np.zeros(0, dtype=int)
        self.soc = {dim: np.vstack(blocks) for dim, blocks in sorted(soc.items())}
        self.soc_blocks = soc_blocks

    def project(self, s: np.ndarray) -> np.ndarray:
        out = np.array(s, dtype=float, copy=True)
        out[self.zero] = 0.0
        out[self.nonneg] = np.maximum(out[self.nonneg], 0.0)
        for idx in self.soc.values():
            out[idx] = _project_soc_rows(out[idx])
        return out

    def project_dual(self, y: np.ndarray) -> np.ndarray:
        """
        Projection onto the dual cone K*: zero cones are free, the others are
        self-dual.
        """
        out = np.array(y, dtype=float, copy=True)
        out[self.nonneg] = np.maximum(out[self.nonneg], 0.0)
        for idx in self.soc.values():
            out[idx] = _project_soc_rows(out[idx])
        return out


def _project_soc_rows(block: np.ndarray) -> np.ndarray:
    """Project each row (t, u) of an (n, d) array onto the second-order cone."""
    t = block[:, 0]
    u = block[:, 1:]
    norm_u = np.linalg.norm(u, axis=1)
    out = np.zeros_like(block)

    inside = norm_u <= t
    out[inside] = block[inside]

    # rows with norm_u <= -t project to zero and are already zero in out
    between = ~inside & (norm_u > -t)
    if np.any(between):
        nu = norm_u[between]
        scale = 0.5 * (t[between] + nu)
        out[between, 0] = scale
        out[between, 1:] = (scale / nu)[:, None] * u[between]
    return out


def cone_project(s: np.ndarray, cones: Sequence[Cone]) -> np.ndarray:
    """
    Euclidean projection of s onto the cone product, block by block.
    """
    s = np.asarray(s, dtype=float)
    index = ConeIndex(cones)
    if index.m != s.shape[0]:
        raise ValueError(f"cone dimensions sum to {index.m}, vector has length {s.shape[0]}")
    return index.project(s)
