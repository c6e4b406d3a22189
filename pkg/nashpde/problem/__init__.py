"""Discrete problem: grid, fields, players, control space, presets, loading."""

__all__ = ["spec", "controls", "presets", "quadrature", "loader"]
