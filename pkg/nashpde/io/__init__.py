__all__ = ["tabulated", "csv_dump"]
