"""Finite-difference gradient check and the unilateral-deviation (Nash) check."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from nashpde.game.operator import OperatorHandle
from nashpde.objectives.functionals import eval_Ji
from nashpde.pde.adjoint import riesz_gradient
from nashpde.problem.controls import ControlBundle, control_space
from nashpde.problem.spec import ProblemSpec
from nashpde.utils.logging import log


def fd_gradient_check(
    spec: ProblemSpec,
    i: int,
    v: ControlBundle,
    directions: int = 10,
    eps: float = 1e-5,
    seed: int = 0,
) -> float:
    """
    Max relative error between (J_i(v + eps d) - J_i(v - eps d)) / (2 eps)
    and <riesz_gradient, d> over seeded random unit directions on player i.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    space = control_space(spec)
    rng = np.random.default_rng(seed)
    g = space.supported_on(i, riesz_gradient(spec, i, v))

    worst = 0.0
    for _ in range(directions):
        d = space.random(rng, player=i)
        fd = (eval_Ji(spec, i, v + d * eps) - eval_Ji(spec, i, v - d * eps)) / (2.0 * eps)
        exact = space.inner(g, d)
        scale = max(abs(exact), abs(fd))
        if scale > 0:
            worst = max(worst, abs(fd - exact) / scale)
    log(f"fd check player {i}: eps={eps:g}, {directions} directions, max relative error {worst:.3e}")
    return worst


def fd_error_curve(
    spec: ProblemSpec,
    i: int,
    v: ControlBundle,
    eps_values: Sequence[float] = (1e-3, 1e-4, 1e-5),
    directions: int = 10,
    seed: int = 0,
) -> dict[float, float]:
    return {eps: fd_gradient_check(spec, i, v, directions, eps, seed) for eps in eps_values}


def unilateral_check(
    op: OperatorHandle,
    u: ControlBundle,
    trials: int = 40,
    seed: int = 0,
    steps: Sequence[float] = (1e-3, 1e-2),
) -> float:
    """
    min over deviations of J_i(u + eps d) - J_i(u), with d supported on one player.

    Deviations are the normalized steepest-descent direction of every player
    plus `trials` random unit directions (each tried with both signs). A Nash
    equilibrium gives a value >= -1e-12.
    """
    spec, space = op.spec, op.space
    rng = np.random.default_rng(seed)
    base = [eval_Ji(spec, i, u) for i in range(spec.n_players)]

    candidates: list[tuple[int, ControlBundle]] = []
    for i in range(spec.n_players):
        g = space.supported_on(i, riesz_gradient(spec, i, u))
        g_norm = g.norm()
        if g_norm > 0:
            candidates.append((i, g * (-1.0 / g_norm)))
    for _ in range(trials):
        i = int(rng.integers(spec.n_players))
        d = space.random(rng, player=i)
        candidates += [(i, d), (i, -d)]

    worst = np.inf
    for i, d in candidates:
        for eps in steps:
            worst = min(worst, eval_Ji(spec, i, u + d * eps) - base[i])
    log(f"unilateral check: {len(candidates)} directions x {len(steps)} steps, worst change {worst:.3e}")
    return float(worst)
