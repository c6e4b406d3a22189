__all__ = ["logging"]
