"""Dense assembly of A at small scale, with direct solve and spectral checks."""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as scla
from tqdm import tqdm

from nashpde.errors import DimensionCapError, SingularOperatorError
from nashpde.game.operator import OperatorHandle
from nashpde.io.csv_dump import write_matrix_csv
from nashpde.problem.controls import ControlBundle, ControlSpace
from nashpde.utils.logging import log

PIVOT_RTOL = 1e-13


@dataclass(frozen=True, eq=False)
class DenseOperator:
    A: np.ndarray
    b: np.ndarray
    weights: np.ndarray
    space: ControlSpace

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def index(self, i: int, n: int, c: int) -> int:
        """(player, step row, node column) -> flat index."""
        return self.space.index(i, n, c)

    def locate(self, k: int) -> tuple[int, int, int]:
        return self.space.locate(k)

    def weighted(self) -> np.ndarray:
        """W A, symmetric exactly when A is self-adjoint in the U inner product."""
        return self.weights[:, None] * self.A


def assemble_dense(op: OperatorHandle, cap: int = 2000, progress: bool = False) -> DenseOperator:
    space = op.space
    if space.dim > cap:
        raise DimensionCapError(space.dim, cap)
    A = np.empty((space.dim, space.dim))
    for k in tqdm(range(space.dim), desc="assembling A", disable=not progress):
        A[:, k] = op.apply(space.basis(k)).flat()
    log(f"assembled dense operator: {space.dim} x {space.dim}")
    return DenseOperator(A=A, b=op.rhs().flat(), weights=np.array(space.weights), space=space)


def direct_solve(d: DenseOperator, pivot_rtol: float = PIVOT_RTOL) -> ControlBundle:
    """LU with partial pivoting; a pivot below pivot_rtol * max|A| counts as singular."""
    if not np.any(d.b):
        return d.space.zeros()
    lu, piv = scla.lu_factor(d.A, check_finite=True)
    pivots = np.abs(np.diag(lu))
    scale = np.max(np.abs(d.A))
    if scale == 0 or pivots.min() <= pivot_rtol * scale:
        raise SingularOperatorError(
            f"dense operator is singular to tolerance (min pivot {pivots.min():.3e}, max |A| {scale:.3e}); "
            "the game is likely not elliptic"
        )
    return d.space.from_flat(scla.lu_solve((lu, piv), d.b))


def symmetry_defect(d: DenseOperator) -> float:
    """max |(WA)_kl - (WA)_lk| / max |WA|."""
    WA = d.weighted()
    scale = np.max(np.abs(WA))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(WA - WA.T)) / scale)


def min_eigen_sym(d: DenseOperator) -> float:
    """Smallest lambda of (WA + (WA)^T)/2 x = lambda W x."""
    WA = d.weighted()
    S = 0.5 * (WA + WA.T)
    values = scla.eigh(S, np.diag(d.weights), eigvals_only=True, subset_by_index=[0, 0])
    return float(values[0])


def dump_dense(d: DenseOperator, out_dir: str) -> list[str]:
    """Write A, b and the weights as CSV; returns the file paths."""
    return [
        write_matrix_csv(os.path.join(out_dir, "dense_A.csv"), d.A, header=f"A ({d.dim} x {d.dim})"),
        write_matrix_csv(os.path.join(out_dir, "dense_b.csv"), d.b[None, :], header="b"),
        write_matrix_csv(os.path.join(out_dir, "dense_weights.csv"), d.weights[None, :], header="U weights"),
    ]


def read_dense_csv(path: str) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", comments="#", ndmin=2)


def dense_agreement(d: DenseOperator, op: OperatorHandle, samples: int = 20, seed: int = 0) -> float:
    """max ||A v - apply_A(v)|| / ||v|| over seeded random bundles."""
    space = d.space
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        v = space.random(rng)
        diff = space.from_flat(d.A @ v.flat()) - op.apply(v)
        worst = max(worst, diff.norm() / v.norm())
    return worst


def solution_distance(u: ControlBundle, w: ControlBundle, reference: Optional[ControlBundle] = None) -> float:
    """||u - w|| / ||reference|| (reference defaults to w; absolute when it is zero)."""
    ref = (reference if reference is not None else w).norm()
    gap = (u - w).norm()
    return gap / ref if ref > 0 else gap
