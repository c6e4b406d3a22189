"""Solve A u = b and package the equilibrium as a NashReport."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from nashpde.errors import NonConvergenceError
from nashpde.game.krylov import KrylovResult, conjugate_gradient, restarted_gmres
from nashpde.game.operator import (
    OperatorHandle,
    ellipticity_probe,
    nash_residual,
    symmetric_part_min_eigenvalue,
)
from nashpde.problem.controls import ControlBundle
from nashpde.rules.notes import run_notes
from nashpde.utils.logging import log


@dataclass
class NashReport:
    u: ControlBundle
    mode: str
    solver: str
    iterations: int
    residual: float
    residual_internal: float
    J_values: list[float]
    ellipticity_probe: Optional[float]
    seed: int
    converged: bool
    b_norm: float
    rtol: float
    timings: dict[str, float] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    counters: dict[str, int] = field(default_factory=dict)
    history: list[float] = field(default_factory=list)
    ellipticity_min: Optional[float] = None

    def to_json(self, timings: bool = True) -> dict[str, Any]:
        """JSON document; timings can be left out for reproducibility comparisons."""
        out = {
            "mode": self.mode,
            "solver": self.solver,
            "converged": self.converged,
            "iterations": self.iterations,
            "rtol": self.rtol,
            "residual": self.residual,
            "residual_internal": self.residual_internal,
            "b_norm": self.b_norm,
            "J_values": list(self.J_values),
            "ellipticity_probe": self.ellipticity_probe,
            "ellipticity_min": self.ellipticity_min,
            "seed": self.seed,
            "notes": list(self.notes),
            "counters": dict(self.counters),
            "residual_history": list(self.history),
        }
        if timings:
            out["timings"] = dict(self.timings)
        return out


def _start(op: OperatorHandle, x0: Optional[ControlBundle]) -> Optional[np.ndarray]:
    if x0 is None:
        return None
    return op.space.check(x0).flat()


def _finish(
    op: OperatorHandle,
    result: KrylovResult,
    solver: str,
    rtol: float,
    seed: int,
    probe_samples: int,
    t_solve: float,
    ellipticity_cap: int = 2000,
) -> NashReport:
    from nashpde.objectives.functionals import eval_Ji

    spec = op.spec
    u = op.space.from_flat(result.x)
    b_norm = op.rhs().norm()

    t0 = time.perf_counter()
    fresh = nash_residual(op, u)
    residual = fresh / b_norm if b_norm > 0 else fresh
    J_values = [eval_Ji(spec, i, u) for i in range(spec.n_players)]
    probe = ellipticity_probe(op, probe_samples, seed) if probe_samples > 0 else None
    # general mode: a converged iterate only counts when A is elliptic
    lam = None
    if not op.symmetric and probe_samples > 0:
        lam = symmetric_part_min_eigenvalue(op, cap=ellipticity_cap, seed=seed)
    elliptic = lam is None or lam > 0.0
    t_post = time.perf_counter() - t0

    report = NashReport(
        u=u,
        mode=op.mode,
        solver=solver,
        iterations=result.iterations,
        residual=residual,
        residual_internal=result.relative_residual,
        J_values=J_values,
        ellipticity_probe=probe,
        seed=seed,
        converged=result.converged and elliptic,
        b_norm=b_norm,
        rtol=rtol,
        timings={"solve": t_solve, "post": t_post},
        counters=op.counters,
        history=list(result.history),
        ellipticity_min=lam,
    )
    report.notes = run_notes(
        {
            "mode": report.mode,
            "alpha_min": min(p.alpha for p in spec.players),
            "ellipticity_probe": probe,
            "ellipticity_min": lam,
            "converged": report.converged,
            "b_norm": b_norm,
            "residual": residual,
            "residual_internal": report.residual_internal,
        }
    )
    if not elliptic:
        raise NonConvergenceError(
            f"{solver}: symmetric part of A has min eigenvalue {lam:.3e} <= 0; "
            "the game is not elliptic and the iterate is not an equilibrium",
            history=result.history,
            iterate=u,
            report=report,
        )
    if not result.converged:
        raise NonConvergenceError(
            f"{solver}: no convergence in {result.iterations} iterations "
            f"(relative residual {result.relative_residual:.3e} > {rtol:.1e})",
            history=result.history,
            iterate=u,
            report=report,
        )
    log(f"{solver}: equilibrium found, relative residual {residual:.3e}, J = {J_values}")
    return report


def solve_cg(
    op: OperatorHandle,
    rtol: float = 1e-10,
    maxiter: Optional[int] = None,
    x0: Optional[ControlBundle] = None,
    seed: int = 0,
    probe_samples: int = 8,
) -> NashReport:
    """Conjugate gradients on A u = b in the U inner product. Symmetric mode only."""
    op.require_symmetric("solve_cg")
    t0 = time.perf_counter()
    result = conjugate_gradient(
        op.matvec, op.rhs().flat(), op.space.weights, x0=_start(op, x0), rtol=rtol, maxiter=maxiter, label="cg"
    )
    return _finish(op, result, "cg", rtol, seed, probe_samples, time.perf_counter() - t0)


def solve_general(
    op: OperatorHandle,
    rtol: float = 1e-10,
    restart: int = 50,
    maxiter: Optional[int] = None,
    x0: Optional[ControlBundle] = None,
    seed: int = 0,
    probe_samples: int = 8,
    ellipticity_cap: int = 2000,
) -> NashReport:
    """
    Restarted GMRES on A u = b in the U inner product; any mode.

    In general mode the smallest eigenvalue of the symmetric part of A is computed
    (dense up to ellipticity_cap, Lanczos above); when it is <= 0 the run raises
    NonConvergenceError even if the residual met rtol. probe_samples=0 skips both
    ellipticity diagnostics.
    """
    t0 = time.perf_counter()
    result = restarted_gmres(
        op.matvec,
        op.rhs().flat(),
        op.space.weights,
        x0=_start(op, x0),
        rtol=rtol,
        restart=restart,
        maxiter=maxiter,
        label="gmres",
    )
    return _finish(
        op, result, "gmres", rtol, seed, probe_samples, time.perf_counter() - t0, ellipticity_cap=ellipticity_cap
    )
