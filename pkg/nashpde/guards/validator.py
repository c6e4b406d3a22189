"""(ok, message) validators used by the problem loader and the game setup."""
from __future__ import annotations

import math
from typing import Sequence, Tuple

import numpy as np

ALIGN_TOL = 1e-9


def validate_grid(length: float, horizon: float, nx: int, nt: int) -> Tuple[bool, str]:
    if not (math.isfinite(length) and length > 0):
        return False, f"length L must be positive, got {length}"
    if not (math.isfinite(horizon) and horizon > 0):
        return False, f"horizon T must be positive, got {horizon}"
    if int(nx) != nx or nx < 4:
        return False, f"nx must be an integer >= 4, got {nx}"
    if int(nt) != nt or nt < 2:
        return False, f"nt must be an integer >= 2, got {nt}"
    return True, ""


def node_index(x: float, h: float) -> Tuple[bool, int]:
    """Return (aligned, index) for a coordinate on a grid of spacing h."""
    q = x / h
    k = int(round(q))
    return abs(q - k) <= ALIGN_TOL * max(1.0, abs(q)), k


def validate_omega(omega: Sequence[float], length: float, nx: int) -> Tuple[bool, str]:
    if len(omega) != 2:
        return False, "omega must be a pair [a, b]"
    a, b = float(omega[0]), float(omega[1])
    if not a < b:
        return False, f"omega needs a < b, got [{a}, {b}]"
    if a <= 0.0 or b >= length:
        return False, f"omega [{a}, {b}] must lie inside (0, {length})"
    h = length / nx
    for name, x in (("a", a), ("b", b)):
        aligned, _ = node_index(x, h)
        if not aligned:
            return False, f"omega endpoint {name}={x} is not a grid node (h={h})"
    return True, ""


def validate_weight(values: np.ndarray) -> Tuple[bool, str]:
    if not np.all(np.isfinite(values)):
        return False, "weight field has non-finite entries"
    if np.any(values < 0):
        j = int(np.argmin(values))
        return False, f"weight field is negative at node {j} ({values[j]})"
    return True, ""


def validate_disjoint(node_sets: Sequence[np.ndarray]) -> Tuple[bool, str]:
    for i in range(len(node_sets)):
        for j in range(i + 1, len(node_sets)):
            shared = np.intersect1d(node_sets[i], node_sets[j])
            if shared.size:
                return False, (
                    f"overlapping control regions: players {i + 1} and {j + 1} "
                    f"share grid node {int(shared[0])}"
                )
    return True, ""


def common_targets(rhos: Sequence[np.ndarray], etas: Sequence[np.ndarray]) -> bool:
    """Elementwise check that every rho_i and every eta_i coincide."""
    return all(np.array_equal(rhos[0], r) for r in rhos[1:]) and all(
        np.array_equal(etas[0], e) for e in etas[1:]
    )
