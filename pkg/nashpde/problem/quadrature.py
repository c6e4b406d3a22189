"""Discrete integrals over Omega and Q.

Space: trapezoid rule on the nodes. Time: rectangle rule on levels 1..nt
(level 0 is data, not decision dependent).
"""
from __future__ import annotations

import numpy as np

from nashpde.problem.spec import GridSpec


def space_integral(grid: GridSpec, weight: np.ndarray, values: np.ndarray) -> float:
    return float(np.dot(grid.trapezoid_weights() * weight, values))


def space_time_integral(grid: GridSpec, weight: np.ndarray, values: np.ndarray) -> float:
    q = grid.trapezoid_weights() * weight
    return float(grid.dt * np.sum(values[1:] @ q))
