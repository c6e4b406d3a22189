"""Forward solver for y_t - y_xx = f + sum_i v_i chi_{omega_i} on (0, L) x (0, T).

Implicit Euler in time (theta = 1), forcing evaluated at the new level,
Dirichlet y = g1 at x = 0, Neumann y_x = g2 at x = L through a ghost node.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from nashpde.errors import ShapeMismatchError
from nashpde.problem.controls import ControlBundle, control_space
from nashpde.problem.spec import GridSpec, ProblemSpec, SpaceTimeField
from nashpde.pde.tridiagonal import TridiagonalSystem, heat_system


@dataclass(frozen=True, eq=False)
class StateSolution:
    y: SpaceTimeField
    steps: int
    theta: float = 1.0


def step(
    y_prev: np.ndarray,
    forcing: np.ndarray,
    g1: float,
    g2: float,
    grid: GridSpec,
    system: Optional[TridiagonalSystem] = None,
) -> np.ndarray:
    """One implicit-Euler step: (I - dt Delta_h) y_new = y_prev + dt forcing."""
    n = grid.nx + 1
    if np.shape(y_prev) != (n,) or np.shape(forcing) != (n,):
        raise ShapeMismatchError(
            f"step expects fields of length {n}, got {np.shape(y_prev)} and {np.shape(forcing)}"
        )
    system = system or heat_system(grid)
    dt, h = grid.dt, grid.h

    rhs = y_prev[1:] + dt * forcing[1:]
    rhs[0] += dt / h**2 * g1
    rhs[-1] += 2.0 * dt / h * g2

    y_new = np.empty(n)
    y_new[0] = g1
    y_new[1:] = system.solve(rhs)
    return y_new


def march(
    grid: GridSpec,
    y0: np.ndarray,
    forcing: np.ndarray,
    g1: np.ndarray,
    g2: np.ndarray,
) -> np.ndarray:
    """Run all nt steps; forcing is (nt+1, nx+1) with level 0 unused."""
    system = heat_system(grid)
    y = np.empty(grid.shape)
    y[0] = y0
    for n in range(1, grid.nt + 1):
        y[n] = step(y[n - 1], forcing[n], g1[n], g2[n], grid, system)
    return y


def solve_state(spec: ProblemSpec, v: ControlBundle) -> StateSolution:
    g = spec.grid
    forcing = spec.f.values + control_space(spec).source(v)
    y = march(g, spec.y0, forcing, spec.g1, spec.g2)
    return StateSolution(SpaceTimeField(y), steps=g.nt)


def solve_state_homogeneous(spec: ProblemSpec, v: ControlBundle) -> StateSolution:
    """y~(v): zero f, y0, g1, g2; linear in v."""
    g = spec.grid
    zeros_t = np.zeros(g.nt + 1)
    y = march(g, np.zeros(g.nx + 1), control_space(spec).source(v), zeros_t, zeros_t)
    return StateSolution(SpaceTimeField(y), steps=g.nt)


def solve_state_free(spec: ProblemSpec) -> StateSolution:
    """y-bar: the state with every control switched off."""
    g = spec.grid
    y = march(g, spec.y0, spec.f.values, spec.g1, spec.g2)
    return StateSolution(SpaceTimeField(y), steps=g.nt)
