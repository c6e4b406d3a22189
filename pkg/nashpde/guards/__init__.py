__all__ = ["validator"]
