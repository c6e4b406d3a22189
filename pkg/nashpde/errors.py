"""Exception types raised by nashpde.

The CLI maps them onto exit codes: ConfigError and DimensionCapError -> 1,
NonConvergenceError -> 2, VerificationError -> 3.
"""
from __future__ import annotations

from typing import Any, Sequence


class NashPDEError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(ValueError, NashPDEError):
    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class ShapeMismatchError(ValueError, NashPDEError):
    pass


class ModeError(NashPDEError):
    """A symmetric-only operation was requested on a general-mode problem."""


class NonConvergenceError(NashPDEError):
    def __init__(
        self,
        message: str,
        history: Sequence[float] = (),
        iterate: Any = None,
        report: Any = None,
    ):
        self.history = list(history)
        self.iterate = iterate
        self.report = report
        super().__init__(message)


class DimensionCapError(NashPDEError):
    def __init__(self, dimension: int, cap: int):
        self.dimension = dimension
        self.cap = cap
        super().__init__(
            f"control-space dimension {dimension} exceeds the dense cap {cap}; "
            "use a coarser grid or raise solver.dense_cap"
        )


class SingularOperatorError(NashPDEError):
    pass


class VerificationError(NashPDEError):
    def __init__(self, check: str, detail: str = ""):
        self.check = check
        super().__init__(f"check '{check}' failed" + (f": {detail}" if detail else ""))
