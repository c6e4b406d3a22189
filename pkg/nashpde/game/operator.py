"""The optimality operator A and the vector b, with dJ_i/dv_i = (A v - b)_i.

A v = (alpha_i v_i + p~_i(v) chi_{omega_i})_i, b = (-p-bar_i chi_{omega_i})_i.
"""
from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from nashpde.errors import ModeError, VerificationError
from nashpde.game.krylov import conjugate_gradient
from nashpde.pde.adjoint import (
    AdjointSolution,
    observe,
    observe_adjoint,
    riesz_gradient,
    solve_adjoint,
    solve_adjoint_homogeneous,
)
from nashpde.pde.heat import StateSolution, solve_state_free, solve_state_homogeneous
from nashpde.problem.controls import ControlBundle, control_space
from nashpde.problem.spec import ProblemSpec
from nashpde.utils.logging import log

SYMMETRIC = "symmetric"
GENERAL = "general"


class OperatorHandle:
    """Matrix-free handle on A for one problem, with solve counters."""

    def __init__(self, spec: ProblemSpec, mode: Optional[str] = None, threads: int = 1):
        if mode is None:
            mode = SYMMETRIC if spec.common_target_mode else GENERAL
        if mode not in (SYMMETRIC, GENERAL):
            raise ValueError(f"unknown operator mode {mode!r}")
        if mode == SYMMETRIC and not (spec.common_target_mode and spec.targets_are_common()):
            raise ModeError("symmetric mode needs rho_i = rho and eta_i = eta for every player")
        self.spec = spec
        self.mode = mode
        self.space = control_space(spec)
        self.threads = max(1, int(threads))
        self._lock = threading.Lock()
        self._counters = {"applications": 0, "forward_solves": 0, "adjoint_solves": 0}
        self._b: Optional[ControlBundle] = None
        self._free: Optional[StateSolution] = None

    @property
    def symmetric(self) -> bool:
        return self.mode == SYMMETRIC

    @property
    def counters(self) -> dict[str, int]:
        with self._lock:
            return dict(self._counters)

    def reset_counters(self) -> None:
        with self._lock:
            for k in self._counters:
                self._counters[k] = 0

    def count(self, **increments: int) -> None:
        with self._lock:
            for k, n in increments.items():
                self._counters[k] += n

    def require_symmetric(self, what: str) -> None:
        if not self.symmetric:
            raise ModeError(f"{what} is only defined in symmetric (common-target) mode")

    # ---- operator application ----
    def _per_player(self, fn, n: int) -> list:
        if self.threads > 1 and n > 1:
            with ThreadPoolExecutor(max_workers=min(self.threads, n)) as pool:
                return list(pool.map(fn, range(n)))
        return [fn(i) for i in range(n)]

    def homogeneous_adjoints(self, y_tilde: StateSolution) -> list[AdjointSolution]:
        """p~_i for every player; one shared sweep in symmetric mode."""
        spec = self.spec
        if self.symmetric:
            p = solve_adjoint_homogeneous(spec, 0, y_tilde)
            self.count(adjoint_solves=1)
            return [AdjointSolution(p.p, player=i) for i in range(spec.n_players)]

        def one(i: int) -> AdjointSolution:
            p = solve_adjoint_homogeneous(spec, i, y_tilde)
            self.count(adjoint_solves=1)
            return p

        return self._per_player(one, spec.n_players)

    def apply(self, v: ControlBundle) -> ControlBundle:
        spec, space = self.spec, self.space
        space.check(v)
        y_tilde = solve_state_homogeneous(spec, v)
        self.count(applications=1, forward_solves=1)
        adjoints = self.homogeneous_adjoints(y_tilde)
        return space.bundle(
            [spec.players[i].alpha * v.blocks[i] + space.restrict(adjoints[i].p, i) for i in range(spec.n_players)]
        )

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.apply(self.space.from_flat(x)).flat()

    def apply_adjoint(self, w: ControlBundle) -> ControlBundle:
        """A^* w in the U inner product: alpha w + sum_i L_i^*(L (0, ..., w_i, ..., 0)).

        Equals apply(w) in symmetric mode; costs N forward and N adjoint solves.
        """
        spec, space = self.spec, self.space
        space.check(w)
        out = space.bundle([player.alpha * w.blocks[i] for i, player in enumerate(spec.players)])
        for i in range(spec.n_players):
            out = out + observe_adjoint(spec, i, *observe(spec, w.only(i)))
        self.count(forward_solves=spec.n_players, adjoint_solves=spec.n_players)
        return out

    # ---- constant part ----
    def free_state(self) -> StateSolution:
        if self._free is None:
            self._free = solve_state_free(self.spec)
            self.count(forward_solves=1)
        return self._free

    def rhs(self) -> ControlBundle:
        if self._b is None:
            spec, space = self.spec, self.space
            y_bar = self.free_state()

            def one(i: int) -> np.ndarray:
                p = solve_adjoint(spec, i, y_bar)
                self.count(adjoint_solves=1)
                return -space.restrict(p.p, i)

            self._b = space.bundle(self._per_player(one, spec.n_players))
        return self._b


def apply_A(op: OperatorHandle, v: ControlBundle) -> ControlBundle:
    return op.apply(v)


def compute_b(op: OperatorHandle) -> ControlBundle:
    return op.rhs()


def nash_residual(op: OperatorHandle, v: ControlBundle) -> float:
    """||A v - b|| in the U norm; zero exactly at the Nash equilibrium."""
    return (op.apply(v) - op.rhs()).norm()


def relative_nash_residual(op: OperatorHandle, v: ControlBundle) -> float:
    b_norm = op.rhs().norm()
    r = nash_residual(op, v)
    return r / b_norm if b_norm > 0 else r


def ellipticity_probe(op: OperatorHandle, samples: int = 8, seed: int = 0, slack: float = 1e-10) -> float:
    """
    Smallest Rayleigh quotient (A v, v) / <v, v> over seeded random unit bundles,
    plus one bundle supported on each single player. A witness, not a bound.
    In symmetric mode the coercivity bound min_i alpha_i is checked as well.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    space = op.space
    rng = np.random.default_rng(seed)
    probes = [space.random(rng) for _ in range(samples)]
    probes += [space.random(rng, player=i) for i in range(space.n_players)]
    value = min(space.inner(op.apply(v), v) for v in probes)

    if op.symmetric:
        alpha_min = min(p.alpha for p in op.spec.players)
        if value < alpha_min - slack:
            raise VerificationError(
                "coercivity",
                f"(A v, v) = {value:.6e} below min alpha_i = {alpha_min:.6e}",
            )
    log(f"ellipticity probe ({len(probes)} bundles, seed {seed}): {value:.6e}")
    return value


def symmetric_part_min_eigenvalue(
    op: OperatorHandle,
    cap: int = 2000,
    seed: int = 0,
    tol: float = 1e-10,
    maxiter: Optional[int] = None,
) -> Optional[float]:
    """
    Smallest eigenvalue of (A + A^*)/2 in the U inner product, i.e. the best
    coercivity constant of A. A is elliptic exactly when it is positive.

    Dense for dim <= cap; above it Lanczos on W^(1/2) (A + A^*)/2 W^(-1/2),
    matrix-free. Returns None when Lanczos does not converge.
    """
    space = op.space
    if space.dim <= cap:
        from nashpde.oracle.dense import assemble_dense, min_eigen_sym

        value = min_eigen_sym(assemble_dense(op, cap=cap))
    else:
        root = np.sqrt(space.weights)

        def sym(x: np.ndarray) -> np.ndarray:
            v = space.from_flat(np.ravel(x) / root)
            return root * (0.5 * (op.apply(v) + op.apply_adjoint(v))).flat()

        linop = LinearOperator((space.dim, space.dim), matvec=sym, dtype=float)
        v0 = np.random.default_rng(seed).standard_normal(space.dim)
        try:
            values = eigsh(linop, k=1, which="SA", tol=tol, maxiter=maxiter, v0=v0, return_eigenvectors=False)
        except ArpackNoConvergence:
            log(f"symmetric-part spectrum: Lanczos did not converge (dim {space.dim})")
            return None
        value = float(values[0])
    log(f"symmetric part of A: min eigenvalue {value:.6e} (dim {space.dim})")
    return value


# ---- unilateral structure ----

def best_response(
    op: OperatorHandle,
    i: int,
    v: ControlBundle,
    rtol: float = 1e-12,
    maxiter: Optional[int] = None,
) -> ControlBundle:
    """
    Player i's optimal reply to the others' controls in v: v with block i replaced
    by the minimizer of J_i. The block A_ii is self-adjoint and coercive with
    constant alpha_i in both modes, so CG applies.
    """
    space = op.space
    lo, hi = int(space.offsets[i]), int(space.offsets[i + 1])
    weights = space.weights[lo:hi]
    others = v.replace(i, np.zeros(space.shapes[i]))
    rhs = -(op.apply(others) - op.rhs()).blocks[i].ravel()

    def block(x: np.ndarray) -> np.ndarray:
        return op.apply(space.supported_on(i, x)).blocks[i].ravel()

    x0 = v.blocks[i].ravel()
    result = conjugate_gradient(block, rhs, weights, x0=x0, rtol=rtol, maxiter=maxiter, label=f"best-response[{i}]")
    return v.replace(i, result.x.reshape(space.shapes[i]))


def nash_gap(op: OperatorHandle, v: ControlBundle) -> float:
    """max_i [J_i(v) - J_i(best response of i to v)]; zero at the equilibrium."""
    from nashpde.objectives.functionals import eval_Ji

    spec = op.spec
    gaps = []
    for i in range(spec.n_players):
        reply = best_response(op, i, v)
        gaps.append(eval_Ji(spec, i, v) - eval_Ji(spec, i, reply))
    return max(gaps)


def optimality_defect(op: OperatorHandle, u: ControlBundle) -> float:
    """max_i ||u_i + p_i(u)|_{omega_i} / alpha_i|| / ||u|| (absolute when u = 0)."""
    spec, space = op.spec, op.space
    worst = 0.0
    for i, player in enumerate(spec.players):
        g = riesz_gradient(spec, i, u) / player.alpha
        worst = max(worst, space.supported_on(i, g).norm())
    u_norm = u.norm()
    return worst / u_norm if u_norm > 0 else worst
