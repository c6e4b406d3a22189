"""Cost functionals, gradient checks and equivalence certification."""

__all__ = ["functionals", "checks", "equivalence"]
