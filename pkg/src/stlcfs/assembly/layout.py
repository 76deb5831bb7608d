"""
Column layout of the convex subproblem.

    x (3T) | v (3T) | a (3(T−1)) | goal 0 chain | … | goal K−1 chain | hinge e (M·T) | elastic σ (K)

A goal chain holds ρ over the window followed by μ for every window step but
the first (μ at τ_start is ρ at τ_start). Hinge column m·T + (t−1) belongs to
obstacle m at step t. Hinge and elastic ranges are empty when not used.
"""

from typing import Dict, List, Sequence, Tuple

import numpy as np

from stlcfs.core.errors import DimensionMismatchError
from stlcfs.dynamics.model import Trajectory, motion_dim


class VariableLayout:

    def __init__(
        self,
        T: int,
        windows: Sequence[Tuple[int, int]],
        M: int,
        with_hinge: bool = True,
        elastic: bool = False,
    ):
        self.T = T
        self.windows = [(int(a), int(b)) for a, b in windows]
        self.M = M
        self.with_hinge = with_hinge
        self.elastic = elastic

        self.x = slice(0, 3 * T)
        self.v = slice(3 * T, 6 * T)
        self.a = slice(6 * T, motion_dim(T))

        offset = motion_dim(T)
        self.chain_offsets: List[int] = []
        for start, end in self.windows:
            self.chain_offsets.append(offset)
            offset += 2 * (end - start + 1) - 1

        n_hinge = M * T if with_hinge else 0
        self.hinge = slice(offset, offset + n_hinge)
        offset += n_hinge

        n_elastic = len(self.windows) if elastic else 0
        self.sigma = slice(offset, offset + n_elastic)
        offset += n_elastic
        self.n = offset

    @property
    def K(self) -> int:
        return len(self.windows)

    def window_length(self, k: int) -> int:
        start, end = self.windows[k]
        return end - start + 1

    def x_col(self, t: int, axis: int) -> int:
        return 3 * (t - 1) + axis

    def a_col(self, t: int, axis: int) -> int:
        return self.a.start + 3 * (t - 1) + axis

    def rho_slice(self, k: int) -> slice:
        start = self.chain_offsets[k]
        return slice(start, start + self.window_length(k))

    def mu_slice(self, k: int) -> slice:
        """Columns of μ at window steps 2 … L (μ at step 1 is ρ)."""
        L = self.window_length(k)
        start = self.chain_offsets[k] + L
        return slice(start, start + L - 1)

    def mu_end_col(self, k: int) -> int:
        L = self.window_length(k)
        return self.chain_offsets[k] + (2 * L - 2 if L > 1 else 0)

    def hinge_col(self, m: int, t: int) -> int:
        if not self.with_hinge:
            raise IndexError("layout has no hinge columns")
        return self.hinge.start + m * self.T + (t - 1)

    def sigma_col(self, k: int) -> int:
        if not self.elastic:
            raise IndexError("layout has no elastic columns")
        return self.sigma.start + k

    def ranges(self) -> Dict[str, Tuple[int, int]]:
        """Named [start, stop) ranges in column order."""
        out = {
            "x": (self.x.start, self.x.stop),
            "v": (self.v.start, self.v.stop),
            "a": (self.a.start, self.a.stop),
        }
        for k in range(self.K):
            rs, ms = self.rho_slice(k), self.mu_slice(k)
            out[f"rho[{k}]"] = (rs.start, rs.stop)
            out[f"mu[{k}]"] = (ms.start, ms.stop)
        out["hinge"] = (self.hinge.start, self.hinge.stop)
        out["sigma"] = (self.sigma.start, self.sigma.stop)
        return out

    def _check(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n,):
            raise DimensionMismatchError(f"vector has shape {z.shape}, layout expects ({self.n},)")
        return z

    def trajectory(self, z: np.ndarray) -> Trajectory:
        return Trajectory.from_vector(self._check(z), self.T)

    def rho(self, z: np.ndarray, k: int) -> np.ndarray:
        return self._check(z)[self.rho_slice(k)].copy()

    def mu(self, z: np.ndarray, k: int) -> np.ndarray:
        """μ over the whole window, with the base value ρ(τ_start) re-inserted."""
        z = self._check(z)
        return np.concatenate([z[self.rho_slice(k)][:1], z[self.mu_slice(k)]])

    def pack(
        self,
        traj: Trajectory,
        rho: Sequence[np.ndarray],
        mu: Sequence[np.ndarray],
        hinge: np.ndarray = None,
        sigma: np.ndarray = None,
    ) -> np.ndarray:
        """Inverse of the extractors; μ[k][0] is dropped (it is ρ[k][0])."""
        if traj.T != self.T:
            raise DimensionMismatchError(f"trajectory has T={traj.T}, layout expects {self.T}")
        z = np.zeros(self.n)
        z[: self.a.stop] = traj.to_vector()
        for k in range(self.K):
            z[self.rho_slice(k)] = rho[k]
            z[self.mu_slice(k)] = np.asarray(mu[k])[1:]
        if hinge is not None:
            z[self.hinge] = hinge
        if sigma is not None:
            z[self.sigma] = sigma
        return z

    def __repr__(self) -> str:
        return f"VariableLayout(T={self.T}, K={self.K}, M={self.M}, n={self.n})"
