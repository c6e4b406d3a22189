"""Cost functionals of the game and of the equivalent single-objective problems.

Tracking integrals use the trapezoid rule in space and the rectangle rule on
levels 1..nt in time, the same quadrature the adjoint sweep transposes.

In the common-target case (rho_i = rho, eta_i = eta)

    J_coop(v) = sum_i alpha_i/2 |v_i|^2
              + 1/2 sum_i [ |y(e_i v_i) - y_{i,d}|^2_rho + |y(T; e_i v_i) - y_{i,T}|^2_eta ]
              + sum_{i<k} [ (y~_i, y~_k)_rho + (y~_i(T), y~_k(T))_eta ]

    J_jp(v)   = sum_i alpha_i/2 |v_i|^2 + 1/2 |y(v) - y_{j,d}|^2_rho + 1/2 |y(T; v) - y_{p,T}|^2_eta
              + sum_{i != j} (y_{j,d} - y_{i,d}, y~_i)_rho + sum_{i != p} (y_{p,T} - y_{i,T}, y~_i(T))_eta

with y~_i = y~(e_i v_i). Both equal J~/2 plus a constant, J~(v) = (A v, v) - 2 (b, v).
The *_literal variants keep the coefficient set as it is usually displayed
(factor 2 on the J_coop cross terms with full states in them, factor 2 on
the J_jp corrections with y~(e_j v_j) in them). They are not equivalent
to J~ and exist for comparison.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from nashpde.errors import ModeError
from nashpde.game.operator import OperatorHandle
from nashpde.pde.adjoint import observe_adjoint
from nashpde.pde.heat import solve_state, solve_state_free, solve_state_homogeneous
from nashpde.problem.controls import ControlBundle, control_space
from nashpde.problem.quadrature import space_integral, space_time_integral
from nashpde.problem.spec import ProblemSpec


def _require_common(spec: ProblemSpec, what: str) -> None:
    if not spec.common_target_mode:
        raise ModeError(f"{what} is only defined in symmetric (common-target) mode")


def _check_player(spec: ProblemSpec, name: str, k: int) -> int:
    if not 0 <= k < spec.n_players:
        raise IndexError(f"{name} = {k} out of range [0, {spec.n_players})")
    return k


def _control_cost(spec: ProblemSpec, v: ControlBundle) -> float:
    space = control_space(spec)
    return sum(
        0.5 * p.alpha * space.inner(v.only(i), v.only(i)) for i, p in enumerate(spec.players)
    )


def _tracking(spec: ProblemSpec, rho: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return space_time_integral(spec.grid, rho, a * b)


def _terminal(spec: ProblemSpec, eta: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return space_integral(spec.grid, eta, a * b)


# ---- the players' costs ----

def eval_Ji_from_state(spec: ProblemSpec, i: int, v: ControlBundle, y: np.ndarray) -> float:
    """J_i given the state values (nt+1, nx+1) that v produces."""
    player = spec.players[_check_player(spec, "i", i)]
    space = control_space(spec)
    e = y - player.target_yd.values
    e_T = y[-1] - player.target_yT
    return (
        0.5 * player.alpha * space.inner(v.only(i), v.only(i))
        + 0.5 * _tracking(spec, player.rho, e, e)
        + 0.5 * _terminal(spec, player.eta, e_T, e_T)
    )


def eval_Ji(spec: ProblemSpec, i: int, v: ControlBundle) -> float:
    return eval_Ji_from_state(spec, i, v, solve_state(spec, v).y.values)


def eval_Jtilde(op: OperatorHandle, v: ControlBundle) -> float:
    """(A v, v) - 2 (b, v)."""
    op.require_symmetric("J~")
    space = op.space
    return space.inner(op.apply(v), v) - 2.0 * space.inner(op.rhs(), v)


# ---- cooperative functionals ----

def _superposition(spec: ProblemSpec, v: ControlBundle, which) -> dict[int, np.ndarray]:
    return {i: solve_state_homogeneous(spec, v.only(i)).y.values for i in which}


def eval_J_coop(spec: ProblemSpec, v: ControlBundle) -> float:
    _require_common(spec, "J_coop")
    rho, eta = spec.players[0].rho, spec.players[0].eta
    y_bar = solve_state_free(spec).y.values
    parts = _superposition(spec, v, range(spec.n_players))

    total = _control_cost(spec, v)
    for i, player in enumerate(spec.players):
        e = parts[i] + y_bar - player.target_yd.values
        e_T = parts[i][-1] + y_bar[-1] - player.target_yT
        total += 0.5 * (_tracking(spec, rho, e, e) + _terminal(spec, eta, e_T, e_T))
    for i in range(spec.n_players):
        for k in range(i + 1, spec.n_players):
            total += _tracking(spec, rho, parts[i], parts[k]) + _terminal(spec, eta, parts[i][-1], parts[k][-1])
    return total


def eval_Jjp(spec: ProblemSpec, j: int, p: int, v: ControlBundle) -> float:
    _require_common(spec, "J_jp")
    _check_player(spec, "j", j)
    _check_player(spec, "p", p)
    rho, eta = spec.players[0].rho, spec.players[0].eta
    y_dj = spec.players[j].target_yd.values
    y_Tp = spec.players[p].target_yT

    y = solve_state(spec, v).y.values
    e = y - y_dj
    e_T = y[-1] - y_Tp
    total = _control_cost(spec, v) + 0.5 * _tracking(spec, rho, e, e) + 0.5 * _terminal(spec, eta, e_T, e_T)

    parts = _superposition(spec, v, [i for i in range(spec.n_players) if i != j or i != p])
    for i, y_i in parts.items():
        other = spec.players[i]
        if i != j:
            total += _tracking(spec, rho, y_dj - other.target_yd.values, y_i)
        if i != p:
            total += _terminal(spec, eta, y_Tp - other.target_yT, y_i[-1])
    return total


def constant_coop(spec: ProblemSpec) -> float:
    """C with J_coop = J~/2 + C."""
    _require_common(spec, "J_coop")
    rho, eta = spec.players[0].rho, spec.players[0].eta
    y_bar = solve_state_free(spec).y.values
    total = 0.0
    for player in spec.players:
        e = y_bar - player.target_yd.values
        e_T = y_bar[-1] - player.target_yT
        total += 0.5 * (_tracking(spec, rho, e, e) + _terminal(spec, eta, e_T, e_T))
    return total


def constant_jp(spec: ProblemSpec, j: int, p: int) -> float:
    """C_{j,p} with J_jp = J~/2 + C_{j,p}."""
    _require_common(spec, "J_jp")
    rho, eta = spec.players[0].rho, spec.players[0].eta
    y_bar = solve_state_free(spec).y.values
    e = y_bar - spec.players[_check_player(spec, "j", j)].target_yd.values
    e_T = y_bar[-1] - spec.players[_check_player(spec, "p", p)].target_yT
    return 0.5 * (_tracking(spec, rho, e, e) + _terminal(spec, eta, e_T, e_T))


# ---- gradients assembled term by term ----

def grad_J_coop(spec: ProblemSpec, v: ControlBundle) -> ControlBundle:
    """
    Riesz gradient of J_coop. Player i's block collects the diagonal term in
    y(e_i v_i) and the cross terms coupling y~_i with every y~_k, k != i.
    """
    _require_common(spec, "J_coop")
    space = control_space(spec)
    y_bar = solve_state_free(spec).y.values
    parts = _superposition(spec, v, range(spec.n_players))

    blocks = []
    for i, player in enumerate(spec.players):
        w = parts[i] + y_bar - player.target_yd.values
        w_T = parts[i][-1] + y_bar[-1] - player.target_yT
        for k in range(spec.n_players):
            if k != i:
                w = w + parts[k]
                w_T = w_T + parts[k][-1]
        trace = observe_adjoint(spec, 0, w, w_T).blocks[i]
        blocks.append(player.alpha * v.blocks[i] + trace)
    return space.bundle(blocks)


def grad_Jjp(spec: ProblemSpec, j: int, p: int, v: ControlBundle) -> ControlBundle:
    """Riesz gradient of J_jp: shared tracking part plus each player's correction."""
    _require_common(spec, "J_jp")
    _check_player(spec, "j", j)
    _check_player(spec, "p", p)
    space = control_space(spec)
    y_dj = spec.players[j].target_yd.values
    y_Tp = spec.players[p].target_yT

    y = solve_state(spec, v).y.values
    shared = observe_adjoint(spec, 0, y - y_dj, y[-1] - y_Tp)

    blocks = []
    for i, player in enumerate(spec.players):
        g = player.alpha * v.blocks[i] + shared.blocks[i]
        if i != j or i != p:
            w = y_dj - player.target_yd.values if i != j else np.zeros_like(y)
            w_T = y_Tp - player.target_yT if i != p else np.zeros_like(y_Tp)
            g = g + observe_adjoint(spec, 0, w, w_T).blocks[i]
        blocks.append(g)
    return space.bundle(blocks)


# ---- displayed coefficient set ----

def eval_J_coop_literal(spec: ProblemSpec, v: ControlBundle) -> float:
    _require_common(spec, "J_coop")
    rho, eta = spec.players[0].rho, spec.players[0].eta
    y_bar = solve_state_free(spec).y.values
    parts = _superposition(spec, v, range(spec.n_players))
    full = {i: parts[i] + y_bar for i in parts}

    total = _control_cost(spec, v)
    for i, player in enumerate(spec.players):
        e = full[i] - player.target_yd.values
        e_T = full[i][-1] - player.target_yT
        total += 0.5 * (_tracking(spec, rho, e, e) + _terminal(spec, eta, e_T, e_T))
    for i in range(spec.n_players):
        for k in range(i + 1, spec.n_players):
            total += 2.0 * (_tracking(spec, rho, full[i], full[k]) + _terminal(spec, eta, full[i][-1], full[k][-1]))
    return total


def eval_Jjp_literal(spec: ProblemSpec, j: int, p: int, v: ControlBundle) -> float:
    _require_common(spec, "J_jp")
    _check_player(spec, "j", j)
    _check_player(spec, "p", p)
    rho, eta = spec.players[0].rho, spec.players[0].eta
    y_dj = spec.players[j].target_yd.values
    y_Tp = spec.players[p].target_yT

    y = solve_state(spec, v).y.values
    e = y - y_dj
    e_T = y[-1] - y_Tp
    total = _control_cost(spec, v) + 0.5 * _tracking(spec, rho, e, e) + 0.5 * _terminal(spec, eta, e_T, e_T)

    y_j = solve_state_homogeneous(spec, v.only(j)).y.values
    correction = 0.0
    for i, other in enumerate(spec.players):
        if i != j:
            correction += _tracking(spec, rho, y_dj - other.target_yd.values, y_j)
        if i != p:
            correction += _terminal(spec, eta, y_Tp - other.target_yT, y_j[-1])
    return total + 2.0 * correction


def functional(spec: ProblemSpec, family: str, j: int = 0, p: int = 0, literal: bool = False):
    """The chosen cooperative functional as a callable v -> float."""
    if family == "coop":
        fn = eval_J_coop_literal if literal else eval_J_coop
        return lambda v: fn(spec, v)
    if family == "jp":
        fn = eval_Jjp_literal if literal else eval_Jjp
        return lambda v: fn(spec, j, p, v)
    raise ValueError(f"unknown functional family {family!r} (expected 'coop' or 'jp')")


def gradient(spec: ProblemSpec, family: str, j: int = 0, p: int = 0):
    if family == "coop":
        return lambda v: grad_J_coop(spec, v)
    if family == "jp":
        return lambda v: grad_Jjp(spec, j, p, v)
    raise ValueError(f"unknown functional family {family!r} (expected 'coop' or 'jp')")


def predicted_constant(spec: ProblemSpec, family: str, j: int = 0, p: int = 0) -> Optional[float]:
    return constant_coop(spec) if family == "coop" else constant_jp(spec, j, p)
