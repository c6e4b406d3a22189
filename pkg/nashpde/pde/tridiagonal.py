"""Implicit-Euler matrix of the 1-D heat equation and its Thomas factorization.

Unknowns are the nodes j = 1..nx (node 0 carries the Dirichlet value). With
r = dt / h^2 the matrix M = I - dt * Delta_h reads

              1+2r   -r
               -r   1+2r   -r
                          ...
                          -r   1+2r   -r
                               -2r   1+2r      <- ghost-node Neumann row

Q M is symmetric for the trapezoid weights Q = diag(h, ..., h, h/2), so the
transposed (adjoint) recursion can be written with M itself on nodal values.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from nashpde.problem.spec import GridSpec


class TridiagonalSystem:
    """
    Storage of matrix elements in vectors as
        sub  = [0, b1, ..., b_{n-1}]
        diag = [a0, a1, ..., a_{n-1}]
        sup  = [c0, c1, ..., c_{n-2}, 0]
    The LU factors are computed once and reused for every right-hand side.
    """

    def __init__(self, sub: np.ndarray, diag: np.ndarray, sup: np.ndarray):
        n = len(diag)
        self.n = n
        self.sub = np.asarray(sub, dtype=float)
        self.diag = np.asarray(diag, dtype=float)
        self.sup = np.asarray(sup, dtype=float)

        # LU decomposition
        self._l = np.zeros(n)
        self._d = np.zeros(n)
        self._d[0] = self.diag[0]
        for i in range(1, n):
            self._l[i] = self.sub[i] / self._d[i - 1]
            self._d[i] = self.diag[i] - self._l[i] * self.sup[i - 1]

    def solve(self, q: np.ndarray) -> np.ndarray:
        """Solve M x = q; q may carry extra trailing columns."""
        q = np.asarray(q, dtype=float)
        y = np.empty_like(q)
        x = np.empty_like(q)

        # Forward substitution, L y = q
        y[0] = q[0]
        for i in range(1, self.n):
            y[i] = q[i] - self._l[i] * y[i - 1]

        # Backward substitution, U x = y
        x[-1] = y[-1] / self._d[-1]
        for i in range(self.n - 2, -1, -1):
            x[i] = (y[i] - self.sup[i] * x[i + 1]) / self._d[i]
        return x

    def matvec(self, x: np.ndarray) -> np.ndarray:
        out = self.diag * x
        out[1:] += self.sub[1:] * x[:-1]
        out[:-1] += self.sup[:-1] * x[1:]
        return out

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub[1:], -1) + np.diag(self.sup[:-1], 1)


@lru_cache(maxsize=32)
def heat_system(grid: GridSpec) -> TridiagonalSystem:
    n = grid.nx
    r = grid.dt / grid.h**2
    diag = np.full(n, 1.0 + 2.0 * r)
    sub = np.full(n, -r)
    sup = np.full(n, -r)
    sub[0] = 0.0
    sup[-1] = 0.0
    sub[-1] = -2.0 * r
    return TridiagonalSystem(sub, diag, sup)
