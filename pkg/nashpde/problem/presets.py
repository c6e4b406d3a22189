"""Analytic presets sampled onto the grid nodes.

A preset is a function of one coordinate. Spatial fields use x in [0, L];
boundary time series use t in [0, T]. Space-time fields repeat the spatial
profile on every level unless a full tabulated array is given.

    constant(c)             c
    gaussian(c, w, amp)     amp * exp(-(s - c)^2 / (2 w^2))
    sine(k, amp)            amp * sin(k pi s / extent)
    indicator(a, b)         1 on nodes in [a, b], 0 elsewhere
    tabulated               array read from file, shape must match
"""
from __future__ import annotations

from typing import Literal, Optional, Sequence

import numpy as np

from nashpde.errors import ConfigError
from nashpde.guards.validator import ALIGN_TOL
from nashpde.problem.spec import GridSpec, SpaceTimeField

PRESET_ARITY = {
    "constant": 1,
    "gaussian": 3,
    "sine": 2,
    "indicator": 2,
}

Axis = Literal["space", "time"]


def _coordinates(grid: GridSpec, axis: Axis) -> tuple[np.ndarray, float]:
    if axis == "space":
        return grid.nodes, grid.length
    if axis == "time":
        return grid.levels, grid.horizon
    raise ConfigError(f"unknown sampling axis '{axis}'")


def sample_preset(
    kind: str,
    params: Sequence[float],
    grid: GridSpec,
    axis: Axis = "space",
    table: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Nodal samples of a preset along one axis (length nx+1 for space, nt+1 for time)."""
    s, extent = _coordinates(grid, axis)

    if kind == "tabulated":
        if table is None:
            raise ConfigError("tabulated preset needs an array")
        arr = np.asarray(table, dtype=float)
        if arr.shape != s.shape:
            raise ConfigError(f"tabulated array has shape {arr.shape}, expected {s.shape}")
        return arr.copy()

    if kind not in PRESET_ARITY:
        raise ConfigError(f"unknown preset '{kind}' (known: {', '.join(sorted(PRESET_ARITY))}, tabulated)")
    params = [float(p) for p in params]
    if len(params) != PRESET_ARITY[kind]:
        raise ConfigError(f"preset '{kind}' takes {PRESET_ARITY[kind]} params, got {len(params)}")

    if kind == "constant":
        return np.full(s.shape, params[0])
    if kind == "gaussian":
        c, w, amp = params
        if not w > 0:
            raise ConfigError(f"gaussian width must be positive, got {w}")
        return amp * np.exp(-((s - c) ** 2) / (2.0 * w * w))
    if kind == "sine":
        k, amp = params
        return amp * np.sin(k * np.pi * s / extent)
    # indicator
    a, b = params
    tol = ALIGN_TOL * extent
    return ((s >= a - tol) & (s <= b + tol)).astype(float)


def sample_space_time(
    kind: str,
    params: Sequence[float],
    grid: GridSpec,
    table: Optional[np.ndarray] = None,
) -> SpaceTimeField:
    if kind == "tabulated" and table is not None and np.ndim(table) == 2:
        arr = np.asarray(table, dtype=float)
        if arr.shape != grid.shape:
            raise ConfigError(f"tabulated array has shape {arr.shape}, expected {grid.shape}")
        return SpaceTimeField(arr)
    return SpaceTimeField.from_profile(grid, sample_preset(kind, params, grid, "space", table))
