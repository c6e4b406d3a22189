"""Dense ground truth at small scale."""

__all__ = ["dense"]
