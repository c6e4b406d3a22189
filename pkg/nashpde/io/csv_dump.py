"""CSV artifacts: comma separated, one header row, 17 significant digits."""
from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from nashpde.problem.spec import GridSpec, SpaceTimeField

FMT = "%.17g"


def _meta(grid: GridSpec) -> str:
    return f"L={grid.length!r} T={grid.horizon!r} nx={grid.nx} nt={grid.nt}"


def write_field_csv(path: str, field: SpaceTimeField, grid: GridSpec) -> str:
    """Rows are time levels, columns are nodes; first column is t."""
    field.check(grid)
    table = np.column_stack([grid.levels, field.values])
    header = "t," + ",".join(f"x{j}" for j in range(grid.nx + 1))
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    np.savetxt(path, table, delimiter=",", fmt=FMT, header=f"{_meta(grid)}\n{header}", comments="# ")
    return path


def read_field_csv(path: str) -> np.ndarray:
    table = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    return table[:, 1:]


def write_slab_csv(path: str, slab: np.ndarray, grid: GridSpec, nodes: Sequence[int]) -> str:
    """One player's control: rows are steps n=1..nt, columns the nodes of omega_i."""
    table = np.column_stack([grid.levels[1:], slab])
    header = "t," + ",".join(f"x{int(j)}" for j in nodes)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    np.savetxt(path, table, delimiter=",", fmt=FMT, header=f"{_meta(grid)}\n{header}", comments="# ")
    return path


def read_slab_csv(path: str) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", comments="#", ndmin=2)[:, 1:]


def write_matrix_csv(path: str, matrix: np.ndarray, header: str = "") -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    np.savetxt(path, np.atleast_2d(matrix), delimiter=",", fmt=FMT, header=header, comments="# ")
    return path
