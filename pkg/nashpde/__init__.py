"""Nash equilibria of distributed-control games for the 1-D heat equation."""

__version__ = "0.3.0"

__all__ = [
    "config",
    "errors",
    "problem",
    "pde",
    "game",
    "objectives",
    "oracle",
    "cli",
]
