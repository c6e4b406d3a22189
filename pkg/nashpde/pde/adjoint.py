"""Discrete adjoint of the implicit-Euler heat solver (discretize-then-optimize).

The backward sweep is the transpose of the forward map. Written on nodal
values p (the Euclidean multiplier divided by the trapezoid weights) it reads

    M p^nt = dt s^nt + s_T
    M p^n  = p^{n+1} + dt s^n,        n = nt-1, ..., 1

with s the tracking source rho_i (y - y_d), s_T the terminal source
eta_i (y(T) - y_T) and M the forward matrix. p = 0 at x_0 and the Neumann row
is homogeneous. Level 0 stores p^1, the sensitivity with respect to y0.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from nashpde.problem.controls import ControlBundle, control_space
from nashpde.problem.quadrature import space_integral, space_time_integral
from nashpde.problem.spec import GridSpec, ProblemSpec, SpaceTimeField
from nashpde.pde.heat import StateSolution, solve_state, solve_state_free, solve_state_homogeneous
from nashpde.pde.tridiagonal import heat_system


@dataclass(frozen=True, eq=False)
class AdjointSolution:
    p: SpaceTimeField
    player: int


def backward_sweep(grid: GridSpec, source: np.ndarray, terminal: np.ndarray) -> np.ndarray:
    """Transpose sweep for a nodal tracking source (nt+1, nx+1) and terminal source (nx+1)."""
    system = heat_system(grid)
    dt, nt = grid.dt, grid.nt
    p = np.zeros(grid.shape)
    p[nt, 1:] = system.solve(dt * source[nt, 1:] + terminal[1:])
    for n in range(nt - 1, 0, -1):
        p[n, 1:] = system.solve(p[n + 1, 1:] + dt * source[n, 1:])
    p[0] = p[1]
    return p


def sweep_residual(grid: GridSpec, p: np.ndarray, source: np.ndarray, terminal: np.ndarray) -> float:
    """Max-norm residual of the stored field against the backward recursion."""
    system = heat_system(grid)
    dt, nt = grid.dt, grid.nt
    worst = float(np.max(np.abs(system.matvec(p[nt, 1:]) - dt * source[nt, 1:] - terminal[1:])))
    for n in range(1, nt):
        r = system.matvec(p[n, 1:]) - p[n + 1, 1:] - dt * source[n, 1:]
        worst = max(worst, float(np.max(np.abs(r))))
    return max(worst, float(np.max(np.abs(p[:, 0]))))


def _sources(spec: ProblemSpec, i: int, y: np.ndarray, y_d: Optional[np.ndarray], y_T: Optional[np.ndarray]):
    player = spec.players[i]
    tracking = y if y_d is None else y - y_d
    final = y[-1] if y_T is None else y[-1] - y_T
    return player.rho * tracking, player.eta * final


def solve_adjoint(spec: ProblemSpec, i: int, y: StateSolution) -> AdjointSolution:
    player = spec.players[i]
    s, s_T = _sources(spec, i, y.y.values, player.target_yd.values, player.target_yT)
    return AdjointSolution(SpaceTimeField(backward_sweep(spec.grid, s, s_T)), player=i)


def solve_adjoint_homogeneous(spec: ProblemSpec, i: int, y_tilde: StateSolution) -> AdjointSolution:
    s, s_T = _sources(spec, i, y_tilde.y.values, None, None)
    return AdjointSolution(SpaceTimeField(backward_sweep(spec.grid, s, s_T)), player=i)


def solve_adjoint_free(spec: ProblemSpec, i: int, y_bar: Optional[StateSolution] = None) -> AdjointSolution:
    return solve_adjoint(spec, i, y_bar or solve_state_free(spec))


def riesz_gradient(spec: ProblemSpec, i: int, v: ControlBundle) -> np.ndarray:
    """dJ_i/dv_i = alpha_i v_i + p_i(v) chi_{omega_i}, as a slab of U_i."""
    space = control_space(spec)
    p = solve_adjoint(spec, i, solve_state(spec, v))
    return spec.players[i].alpha * v.blocks[i] + space.restrict(p.p, i)


# ---- control-to-observation map L_i and its transpose ----

def observe(spec: ProblemSpec, v: ControlBundle) -> tuple[np.ndarray, np.ndarray]:
    """L v = (y~(v) on all levels, y~(T; v))."""
    y = solve_state_homogeneous(spec, v).y.values
    return y, y[-1].copy()


def observe_adjoint(spec: ProblemSpec, i: int, w: np.ndarray, w_T: np.ndarray) -> ControlBundle:
    """L_i^* (w, w_T): backward sweep with sources rho_i w and eta_i w_T, traced on every omega_k."""
    player = spec.players[i]
    space = control_space(spec)
    p = SpaceTimeField(backward_sweep(spec.grid, player.rho * w, player.eta * w_T))
    return space.bundle([space.restrict(p, k) for k in range(spec.n_players)])


def observation_inner(spec: ProblemSpec, i: int, a: tuple[np.ndarray, np.ndarray], b: tuple[np.ndarray, np.ndarray]) -> float:
    player = spec.players[i]
    return space_time_integral(spec.grid, player.rho, a[0] * b[0]) + space_integral(
        spec.grid, player.eta, a[1] * b[1]
    )


def adjoint_identity_defect(
    spec: ProblemSpec, i: int, v: ControlBundle, w: np.ndarray, w_T: np.ndarray
) -> float:
    """|<L v, w>_obs - <v, L_i^* w>_U| / (|v| |w|_obs)."""
    lhs = observation_inner(spec, i, observe(spec, v), (w, w_T))
    rhs = control_space(spec).inner(v, observe_adjoint(spec, i, w, w_T))
    scale = v.norm() * np.sqrt(max(observation_inner(spec, i, (w, w_T), (w, w_T)), 0.0))
    return abs(lhs - rhs) / scale if scale > 0 else abs(lhs - rhs)
