"""Grid, fields and the immutable game description."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from nashpde.errors import ConfigError, ShapeMismatchError
from nashpde.guards.validator import (
    common_targets,
    node_index,
    validate_disjoint,
    validate_grid,
    validate_omega,
    validate_weight,
)


def _frozen(values, ndim: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ShapeMismatchError(f"{name}: expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GridSpec:
    """Uniform space-time grid on (0, L) x (0, T)."""

    length: float
    horizon: float
    nx: int
    nt: int

    def __post_init__(self):
        ok, msg = validate_grid(self.length, self.horizon, self.nx, self.nt)
        if not ok:
            raise ConfigError(msg, key="grid")

    @property
    def h(self) -> float:
        return self.length / self.nx

    @property
    def dt(self) -> float:
        return self.horizon / self.nt

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.nx + 1) * self.h

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.nt + 1) * self.dt

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nt + 1, self.nx + 1)

    def trapezoid_weights(self) -> np.ndarray:
        q = np.full(self.nx + 1, self.h)
        q[0] = q[-1] = 0.5 * self.h
        return q


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Nodal values on the space-time grid; entry (n, j) is the value at (t_n, x_j)."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, 2, "SpaceTimeField"))

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SpaceTimeField":
        return cls(np.zeros(grid.shape))

    @classmethod
    def from_profile(cls, grid: GridSpec, profile: np.ndarray) -> "SpaceTimeField":
        profile = np.asarray(profile, dtype=float)
        if profile.shape != (grid.nx + 1,):
            raise ShapeMismatchError(f"profile shape {profile.shape} != ({grid.nx + 1},)")
        return cls(np.tile(profile, (grid.nt + 1, 1)))

    def check(self, grid: GridSpec) -> "SpaceTimeField":
        if self.values.shape != grid.shape:
            raise ShapeMismatchError(f"field shape {self.values.shape} != grid shape {grid.shape}")
        return self

    @property
    def terminal(self) -> np.ndarray:
        return self.values[-1]

    def at(self, n: int) -> np.ndarray:
        return self.values[n]

    def digest(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.values).tobytes()).hexdigest()

    def __add__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        return SpaceTimeField(self.values + other.values)

    def __sub__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        return SpaceTimeField(self.values - other.values)

    def __mul__(self, a: float) -> "SpaceTimeField":
        return SpaceTimeField(a * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "SpaceTimeField":
        return SpaceTimeField(-self.values)


@dataclass(frozen=True, eq=False)
class PlayerSpec:
    alpha: float
    omega: tuple[float, float]
    rho: np.ndarray
    eta: np.ndarray
    target_yd: SpaceTimeField
    target_yT: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omega", (float(self.omega[0]), float(self.omega[1])))
        object.__setattr__(self, "rho", _frozen(self.rho, 1, "rho"))
        object.__setattr__(self, "eta", _frozen(self.eta, 1, "eta"))
        object.__setattr__(self, "target_yT", _frozen(self.target_yT, 1, "target_yT"))
        if not isinstance(self.target_yd, SpaceTimeField):
            object.__setattr__(self, "target_yd", SpaceTimeField(self.target_yd))


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    grid: GridSpec
    players: tuple[PlayerSpec, ...]
    f: SpaceTimeField
    y0: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    common_target_mode: bool = False

    def __post_init__(self):
        object.__setattr__(self, "players", tuple(self.players))
        object.__setattr__(self, "y0", _frozen(self.y0, 1, "y0"))
        object.__setattr__(self, "g1", _frozen(self.g1, 1, "g1"))
        object.__setattr__(self, "g2", _frozen(self.g2, 1, "g2"))
        if not isinstance(self.f, SpaceTimeField):
            object.__setattr__(self, "f", SpaceTimeField(self.f))
        self._validate()

    def _validate(self) -> None:
        g = self.grid
        if not self.players:
            raise ConfigError("at least one player is required", key="players")
        self.f.check(g)
        for name, arr, n in (("y0", self.y0, g.nx + 1), ("g1", self.g1, g.nt + 1), ("g2", self.g2, g.nt + 1)):
            if arr.shape != (n,):
                raise ShapeMismatchError(f"{name} has shape {arr.shape}, expected ({n},)")
        for i, p in enumerate(self.players):
            key = f"players[{i}]"
            if not p.alpha > 0:
                raise ConfigError(f"alpha must be positive, got {p.alpha}", key=f"{key}.alpha")
            ok, msg = validate_omega(p.omega, g.length, g.nx)
            if not ok:
                raise ConfigError(msg, key=f"{key}.omega")
            for name, arr in (("rho", p.rho), ("eta", p.eta), ("yT", p.target_yT)):
                if arr.shape != (g.nx + 1,):
                    raise ShapeMismatchError(f"{key}.{name} has shape {arr.shape}, expected ({g.nx + 1},)")
            for name, arr in (("rho", p.rho), ("eta", p.eta)):
                ok, msg = validate_weight(arr)
                if not ok:
                    raise ConfigError(msg, key=f"{key}.{name}")
            p.target_yd.check(g)
        ok, msg = validate_disjoint(self.omega_nodes)
        if not ok:
            raise ConfigError(msg, key="players")
        if self.common_target_mode and not self.targets_are_common():
            raise ConfigError(
                "common_target_mode is set but rho_i / eta_i differ between players",
                key="players",
            )

    @property
    def n_players(self) -> int:
        return len(self.players)

    @cached_property
    def omega_nodes(self) -> tuple[np.ndarray, ...]:
        out = []
        for p in self.players:
            _, lo = node_index(p.omega[0], self.grid.h)
            _, hi = node_index(p.omega[1], self.grid.h)
            out.append(np.arange(lo, hi + 1))
        return tuple(out)

    def targets_are_common(self) -> bool:
        return common_targets([p.rho for p in self.players], [p.eta for p in self.players])

    def without_data(self) -> "ProblemSpec":
        """Same players and grid with f, y0, g1, g2 set to zero."""
        g = self.grid
        return ProblemSpec(
            grid=g,
            players=self.players,
            f=SpaceTimeField.zeros(g),
            y0=np.zeros(g.nx + 1),
            g1=np.zeros(g.nt + 1),
            g2=np.zeros(g.nt + 1),
            common_target_mode=self.common_target_mode,
        )


def build_problem(
    grid: GridSpec,
    players: Sequence[PlayerSpec],
    f: Optional[SpaceTimeField] = None,
    y0: Optional[np.ndarray] = None,
    g1: Optional[np.ndarray] = None,
    g2: Optional[np.ndarray] = None,
    common_target_mode: Optional[bool] = None,
) -> ProblemSpec:
    """Build a ProblemSpec, zero-filling missing data and auto-detecting the common-target case."""
    if common_target_mode is None:
        common_target_mode = common_targets([p.rho for p in players], [p.eta for p in players])
    return ProblemSpec(
        grid=grid,
        players=tuple(players),
        f=f if f is not None else SpaceTimeField.zeros(grid),
        y0=y0 if y0 is not None else np.zeros(grid.nx + 1),
        g1=g1 if g1 is not None else np.zeros(grid.nt + 1),
        g2=g2 if g2 is not None else np.zeros(grid.nt + 1),
        common_target_mode=common_target_mode,
    )
