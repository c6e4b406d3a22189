"""State and adjoint solvers for the 1-D heat equation."""

__all__ = ["tridiagonal", "heat", "adjoint"]
