from __future__ import annotations

from typing import Any, Callable, Mapping

# Lightweight diagnostic rules: each inspects a run summary and contributes a short note.
Rule = tuple[str, Callable[[Mapping[str, Any]], bool], str]

SMALL_ALPHA = 1e-6

RULES: list[Rule] = [
    (
        "general-mode",
        lambda r: r.get("mode") == "general",
        "general mode: A is not self-adjoint; existence needs min alpha_i large enough, which is not checked",
    ),
    (
        "small-alpha",
        lambda r: r.get("alpha_min", 1.0) < SMALL_ALPHA,
        "min alpha_i is tiny; the operator may lose ellipticity and Krylov iterations may stall",
    ),
    (
        "negative-probe",
        lambda r: r.get("ellipticity_probe") is not None and r["ellipticity_probe"] <= 0.0,
        "ellipticity probe found (A v, v) <= 0: the game may have no unique equilibrium",
    ),
    (
        "ellipticity-failure",
        lambda r: r.get("ellipticity_min") is not None and r["ellipticity_min"] <= 0.0,
        "symmetric part of A has a non-positive eigenvalue: A is not elliptic, the iterate is not reported as an equilibrium",
    ),
    (
        "not-converged",
        lambda r: r.get("converged") is False,
        "no certified equilibrium (iteration cap reached or A not elliptic); the returned controls are not an equilibrium",
    ),
    (
        "zero-rhs",
        lambda r: r.get("b_norm") == 0.0,
        "b = 0: the equilibrium is u = 0",
    ),
    (
        "residual-mismatch",
        lambda r: _mismatch(r.get("residual"), r.get("residual_internal")),
        "recomputed residual differs from the solver's internal residual by more than 1e-8",
    ),
]


def _mismatch(fresh, internal) -> bool:
    if fresh is None or internal is None:
        return False
    return abs(fresh - internal) > 1e-8 * max(1.0, abs(internal))


def run_notes(summary: Mapping[str, Any]) -> list[str]:
    notes = []
    for name, applies, msg in RULES:
        if applies(summary):
            notes.append(f"{name}: {msg}")
    return notes
