"""The discrete control space U = U_1 x ... x U_N and its weighted inner product.

Player i owns an (nt, m_i) slab: row n-1 holds the control applied over
(t_{n-1}, t_n], column k the k-th grid node of omega_i. Spatial weights are the
trapezoid rule restricted to omega_i (h inside, h/2 at both end nodes).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from nashpde.errors import ShapeMismatchError
from nashpde.problem.spec import ProblemSpec, SpaceTimeField


class ControlSpace:
    def __init__(self, spec: ProblemSpec):
        grid = spec.grid
        self.spec = spec
        self.grid = grid
        self.nodes: tuple[np.ndarray, ...] = spec.omega_nodes
        self.shapes = tuple((grid.nt, len(nodes)) for nodes in self.nodes)

        q = grid.trapezoid_weights()
        self.spatial_weights = []
        self.source_scale = []
        for nodes in self.nodes:
            w = np.full(len(nodes), grid.h)
            w[0] = w[-1] = 0.5 * grid.h
            self.spatial_weights.append(w)
            # trapezoid characteristic function: 1 inside omega_i, 1/2 on its end nodes
            self.source_scale.append(w / q[nodes])

        sizes = [nt * m for nt, m in self.shapes]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        self.dim = int(self.offsets[-1])
        self.weights = np.concatenate(
            [np.tile(grid.dt * w, grid.nt) for w in self.spatial_weights]
        )
        self.weights.setflags(write=False)

    @property
    def n_players(self) -> int:
        return len(self.nodes)

    # ---- construction ----
    def zeros(self) -> "ControlBundle":
        return ControlBundle(self, tuple(np.zeros(s) for s in self.shapes))

    def bundle(self, blocks: Sequence[np.ndarray]) -> "ControlBundle":
        return ControlBundle(self, tuple(np.asarray(b, dtype=float) for b in blocks))

    def from_flat(self, x: np.ndarray) -> "ControlBundle":
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ShapeMismatchError(f"flat vector has shape {x.shape}, expected ({self.dim},)")
        return ControlBundle(
            self,
            tuple(
                x[self.offsets[i]: self.offsets[i + 1]].reshape(self.shapes[i]).copy()
                for i in range(self.n_players)
            ),
        )

    def supported_on(self, i: int, slab: np.ndarray) -> "ControlBundle":
        i = self._player(i)
        blocks = [np.zeros(s) for s in self.shapes]
        blocks[i] = np.asarray(slab, dtype=float).reshape(self.shapes[i])
        return ControlBundle(self, tuple(blocks))

    def basis(self, k: int) -> "ControlBundle":
        x = np.zeros(self.dim)
        x[k] = 1.0
        return self.from_flat(x)

    def random(self, rng: np.random.Generator, player: Optional[int] = None, unit: bool = True) -> "ControlBundle":
        """Standard normal entries (optionally on one player only), scaled to unit U-norm."""
        if player is None:
            v = self.from_flat(rng.standard_normal(self.dim))
        else:
            player = self._player(player)
            v = self.supported_on(player, rng.standard_normal(self.shapes[player]))
        if unit:
            v = v * (1.0 / v.norm())
        return v

    # ---- geometry ----
    def inner(self, u: "ControlBundle", v: "ControlBundle") -> float:
        self.check(u)
        self.check(v)
        return float(np.dot(u.flat() * v.flat(), self.weights))

    def flat_inner(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(np.dot(x * y, self.weights))

    def locate(self, k: int) -> tuple[int, int, int]:
        """Flat index -> (player, step row, node column)."""
        if not 0 <= k < self.dim:
            raise IndexError(f"flat index {k} out of range [0, {self.dim})")
        i = int(np.searchsorted(self.offsets, k, side="right") - 1)
        n, c = divmod(k - int(self.offsets[i]), self.shapes[i][1])
        return i, n, c

    def index(self, i: int, n: int, c: int) -> int:
        i = self._player(i)
        rows, cols = self.shapes[i]
        if not (0 <= n < rows and 0 <= c < cols):
            raise IndexError(f"(step {n}, node {c}) outside player {i} slab {self.shapes[i]}")
        return int(self.offsets[i]) + n * cols + c

    def check(self, v: "ControlBundle") -> "ControlBundle":
        if len(v.blocks) != self.n_players:
            raise ShapeMismatchError(f"bundle has {len(v.blocks)} players, expected {self.n_players}")
        for i, (b, s) in enumerate(zip(v.blocks, self.shapes)):
            if b.shape != s:
                raise ShapeMismatchError(f"player {i} block has shape {b.shape}, expected {s}")
        return v

    # ---- coupling with space-time fields ----
    def restrict(self, field: SpaceTimeField, i: int) -> np.ndarray:
        i = self._player(i)
        return np.array(field.values[1:, self.nodes[i]])

    def extend(self, slab: np.ndarray, i: int) -> SpaceTimeField:
        i = self._player(i)
        slab = np.asarray(slab, dtype=float)
        if slab.shape != self.shapes[i]:
            raise ShapeMismatchError(f"slab shape {slab.shape} != {self.shapes[i]}")
        out = np.zeros(self.grid.shape)
        out[1:, self.nodes[i]] = slab
        return SpaceTimeField(out)

    def source(self, v: "ControlBundle") -> np.ndarray:
        """Distributed forcing sum_i v_i chi_{omega_i} on the grid (level 0 unused)."""
        self.check(v)
        out = np.zeros(self.grid.shape)
        for nodes, scale, block in zip(self.nodes, self.source_scale, v.blocks):
            out[1:, nodes] += block * scale
        return out

    def _player(self, i: int) -> int:
        if not 0 <= i < self.n_players:
            raise IndexError(f"player index {i} out of range [0, {self.n_players})")
        return i


@dataclass(frozen=True, eq=False)
class ControlBundle:
    space: ControlSpace
    blocks: tuple[np.ndarray, ...]

    def flat(self) -> np.ndarray:
        return np.concatenate([b.ravel() for b in self.blocks])

    def norm(self) -> float:
        return float(np.sqrt(self.space.inner(self, self)))

    def block(self, i: int) -> np.ndarray:
        return self.blocks[i]

    def only(self, i: int) -> "ControlBundle":
        """(0, ..., v_i, ..., 0)"""
        return self.space.supported_on(i, self.blocks[i])

    def replace(self, i: int, slab: np.ndarray) -> "ControlBundle":
        blocks = list(self.blocks)
        blocks[i] = np.asarray(slab, dtype=float)
        return ControlBundle(self.space, tuple(blocks))

    def _same(self, other: "ControlBundle") -> None:
        self.space.check(self)
        self.space.check(other)

    def __add__(self, other: "ControlBundle") -> "ControlBundle":
        self._same(other)
        return ControlBundle(self.space, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other: "ControlBundle") -> "ControlBundle":
        self._same(other)
        return ControlBundle(self.space, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __mul__(self, a: float) -> "ControlBundle":
        return ControlBundle(self.space, tuple(a * b for b in self.blocks))

    __rmul__ = __mul__

    def __neg__(self) -> "ControlBundle":
        return self * -1.0


@lru_cache(maxsize=64)
def control_space(spec: ProblemSpec) -> ControlSpace:
    return ControlSpace(spec)


def inner_product(u: ControlBundle, v: ControlBundle) -> float:
    return u.space.inner(u, v)


def restrict_to_omega(spec: ProblemSpec, field: SpaceTimeField, i: int) -> np.ndarray:
    return control_space(spec).restrict(field, i)


def extend_by_zero(spec: ProblemSpec, slab: np.ndarray, i: int) -> SpaceTimeField:
    return control_space(spec).extend(slab, i)
