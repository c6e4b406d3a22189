"""Certify that the Nash equilibrium minimizes the cooperative functionals.

Two independent checks per functional F:
  1. F(v) - J~(v)/2 is the same number for every probe v;
  2. minimizing F with CG on its own gradient lands on the Nash equilibrium.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Optional

import numpy as np

from nashpde.errors import NonConvergenceError, VerificationError
from nashpde.game.krylov import conjugate_gradient
from nashpde.game.operator import OperatorHandle
from nashpde.game.solvers import solve_cg
from nashpde.objectives.functionals import eval_Jtilde, functional, gradient, predicted_constant
from nashpde.problem.controls import ControlBundle
from nashpde.utils.logging import log

MIN_PROBES = 10


@dataclass
class EquivalenceReport:
    family: str
    j: Optional[int]
    p: Optional[int]
    literal: bool
    probes: int
    seed: int
    mean: float
    max_deviation: float
    relative_deviation: float
    variance: float
    predicted_constant: float
    gradient_defect: Optional[float] = None
    argmin_distance: Optional[float] = None
    iterations: Optional[int] = None

    @property
    def label(self) -> str:
        if self.family == "coop":
            return "J_coop"
        return f"J_{{{self.j + 1},{self.p + 1}}}"

    def passed(self, constant_tol: float = 1e-10, argmin_tol: float = 1e-8, variance_tol: float = 1e-20) -> bool:
        ok = self.relative_deviation < constant_tol and self.variance < variance_tol * (1.0 + self.mean ** 2)
        if self.argmin_distance is not None:
            ok = ok and self.argmin_distance < argmin_tol
        return ok

    def to_json(self) -> dict[str, Any]:
        out = asdict(self)
        out["label"] = self.label
        return out


def certify_equivalence(
    op: OperatorHandle,
    family: str = "coop",
    j: int = 0,
    p: int = 0,
    probes: int = 20,
    seed: int = 0,
    literal: bool = False,
    rtol: float = 1e-11,
    nash: Optional[ControlBundle] = None,
    gradient_tolerance: float = 1e-8,
) -> EquivalenceReport:
    op.require_symmetric("certify_equivalence")
    if probes < MIN_PROBES:
        raise ValueError(f"at least {MIN_PROBES} probes are needed, got {probes}")
    spec, space = op.spec, op.space
    F = functional(spec, family, j, p, literal)

    rng = np.random.default_rng(seed)
    bundles = [space.random(rng) for _ in range(probes)]
    diffs = np.array([F(v) - 0.5 * eval_Jtilde(op, v) for v in bundles])
    mean = float(np.mean(diffs))
    max_dev = float(np.max(np.abs(diffs - mean)))

    report = EquivalenceReport(
        family=family,
        j=j if family == "jp" else None,
        p=p if family == "jp" else None,
        literal=literal,
        probes=probes,
        seed=seed,
        mean=mean,
        max_deviation=max_dev,
        relative_deviation=max_dev / (1.0 + abs(mean)),
        variance=float(np.var(diffs)),
        predicted_constant=predicted_constant(spec, family, j, p),
    )
    if literal:
        log(f"{report.label} (literal): constant deviation {report.relative_deviation:.3e}, argmin skipped")
        return report

    grad = gradient(spec, family, j, p)
    b = op.rhs()
    defect = 0.0
    for v in bundles[:2]:
        expected = op.apply(v) - b
        scale = max(expected.norm(), b.norm(), 1.0)
        defect = max(defect, (grad(v) - expected).norm() / scale)
    report.gradient_defect = defect
    if defect > gradient_tolerance:
        raise VerificationError(
            "gradient-consistency",
            f"gradient of {report.label} differs from A v - b by {defect:.3e}",
        )

    # F is quadratic: its Hessian action is grad(d) - grad(0), and the minimizer solves H u = -grad(0)
    g0 = grad(space.zeros())
    g0_flat = g0.flat()

    def hessian(x: np.ndarray) -> np.ndarray:
        return grad(space.from_flat(x)).flat() - g0_flat

    result = conjugate_gradient(hessian, -g0_flat, space.weights, rtol=rtol, label=f"argmin {report.label}")
    if not result.converged:
        raise NonConvergenceError(
            f"minimizing {report.label}: no convergence in {result.iterations} iterations",
            history=result.history,
            iterate=space.from_flat(result.x),
        )
    u_F = space.from_flat(result.x)
    if nash is None:
        nash = solve_cg(op, rtol=rtol, probe_samples=0).u
    nash_norm = nash.norm()
    gap = (u_F - nash).norm()
    report.argmin_distance = gap / nash_norm if nash_norm > 0 else gap
    report.iterations = result.iterations
    log(
        f"{report.label}: constant {mean:.6e} (predicted {report.predicted_constant:.6e}), "
        f"deviation {report.relative_deviation:.3e}, argmin distance {report.argmin_distance:.3e}"
    )
    return report
