"""Matrix-free Krylov solvers in a weighted inner product <x, y> = sum(w * x * y).

Both solvers work on flat vectors and take the operator as a callable, so the
same code runs on the full control space and on a single player's block.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg as scla

from nashpde.errors import NonConvergenceError
from nashpde.utils.logging import log

Matvec = Callable[[np.ndarray], np.ndarray]


@dataclass
class KrylovResult:
    x: np.ndarray
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list)  # relative residuals
    b_norm: float = 0.0

    @property
    def relative_residual(self) -> float:
        return self.history[-1] if self.history else 0.0


def _weighted(weights: np.ndarray):
    def dot(a: np.ndarray, c: np.ndarray) -> float:
        return float(np.dot(a * c, weights))

    return dot


def conjugate_gradient(
    matvec: Matvec,
    b: np.ndarray,
    weights: np.ndarray,
    x0: Optional[np.ndarray] = None,
    rtol: float = 1e-10,
    maxiter: Optional[int] = None,
    label: str = "cg",
) -> KrylovResult:
    """
    CG for an operator self-adjoint and positive in the weighted product.

    Stops when ||b - A x|| <= rtol ||b||. Once the recursive residual passes
    the test the true residual is recomputed; if it does not pass, the
    iteration restarts from it. Returns unconverged results instead of
    raising so callers can attach their own report.
    """
    dot = _weighted(weights)
    n = b.shape[0]
    maxiter = 10 * n if maxiter is None else maxiter
    b_norm = np.sqrt(dot(b, b))
    if b_norm == 0.0:
        return KrylovResult(np.zeros(n), 0, True, [0.0], 0.0)

    if x0 is None:
        x = np.zeros(n)
        r = b.copy()
    else:
        x = np.array(x0, dtype=float)
        r = b - matvec(x)
    rr = dot(r, r)
    history = [np.sqrt(rr) / b_norm]
    if history[-1] <= rtol:
        return KrylovResult(x, 0, True, history, b_norm)

    d = r.copy()
    k = 0
    converged = False
    while k < maxiter:
        Ad = matvec(d)
        dAd = dot(d, Ad)
        if not dAd > 0.0:
            raise NonConvergenceError(
                f"{label}: breakdown at iteration {k}, (A d, d) = {dAd:.3e} is not positive",
                history=history,
                iterate=x,
            )
        a = rr / dAd
        x += a * d
        r -= a * Ad
        rr_new = dot(r, r)
        k += 1
        history.append(np.sqrt(rr_new) / b_norm)

        if history[-1] <= rtol:
            r = b - matvec(x)
            rr_new = dot(r, r)
            history[-1] = np.sqrt(rr_new) / b_norm
            if history[-1] <= rtol:
                converged = True
                break
            log(f"{label}: recursive residual drifted, restarting at iteration {k} (true {history[-1]:.3e})")
            d = r.copy()
            rr = rr_new
            continue

        d = r + (rr_new / rr) * d
        rr = rr_new

    log(f"{label}: {k} iterations, relative residual {history[-1]:.3e}, converged={converged}")
    return KrylovResult(x, k, converged, history, b_norm)


def restarted_gmres(
    matvec: Matvec,
    b: np.ndarray,
    weights: np.ndarray,
    x0: Optional[np.ndarray] = None,
    rtol: float = 1e-10,
    restart: int = 50,
    maxiter: Optional[int] = None,
    label: str = "gmres",
) -> KrylovResult:
    """
    GMRES(restart) with weighted modified Gram-Schmidt and Givens rotations.

    maxiter counts inner iterations over all cycles. The residual at the start
    of every cycle is the true residual b - A x, not the rotated estimate.
    """
    dot = _weighted(weights)
    n = b.shape[0]
    maxiter = 10 * n if maxiter is None else maxiter
    restart = max(1, int(restart))
    b_norm = np.sqrt(dot(b, b))
    if b_norm == 0.0:
        return KrylovResult(np.zeros(n), 0, True, [0.0], 0.0)

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    history: list[float] = []
    total = 0
    cycles = 0
    converged = False

    while True:
        r = b.copy() if (x0 is None and total == 0) else b - matvec(x)
        beta = np.sqrt(dot(r, r))
        if history:
            history[-1] = beta / b_norm
        else:
            history.append(beta / b_norm)
        if history[-1] <= rtol:
            converged = True
            break
        if total >= maxiter:
            break

        m = min(restart, maxiter - total)
        V = np.zeros((m + 1, n))
        H = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = beta
        V[0] = r / beta

        j_done = 0
        for j in range(m):
            w = matvec(V[j])
            for i in range(j + 1):
                H[i, j] = dot(V[i], w)
                w -= H[i, j] * V[i]
            h_next = np.sqrt(dot(w, w))
            H[j + 1, j] = h_next

            for i in range(j):
                hij = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = hij
            denom = np.hypot(H[j, j], H[j + 1, j])
            if denom == 0.0:
                raise NonConvergenceError(
                    f"{label}: singular Hessenberg matrix at iteration {total}",
                    history=history,
                    iterate=x,
                )
            cs[j] = H[j, j] / denom
            sn[j] = H[j + 1, j] / denom
            H[j, j] = denom
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]

            total += 1
            j_done = j + 1
            history.append(abs(g[j + 1]) / b_norm)
            if history[-1] <= rtol or h_next <= 1e-14 * beta:
                break
            V[j + 1] = w / h_next

        y = scla.solve_triangular(H[:j_done, :j_done], g[:j_done])
        x = x + y @ V[:j_done]
        cycles += 1

    log(
        f"{label}: {total} iterations in {cycles} cycles (restart {restart}), "
        f"relative residual {history[-1]:.3e}, converged={converged}"
    )
    return KrylovResult(x, total, converged, history, b_norm)
