"""Optimality operator, Krylov solvers and Nash reports."""

__all__ = ["operator", "krylov", "solvers"]
