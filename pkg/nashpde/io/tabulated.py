import os

import numpy as np

SUFFIXES = (".csv", ".txt", ".npy")


def _resolve(path: str, base_dir: str) -> str:
    return path if os.path.isabs(path) else os.path.join(base_dir, path)


def load_table(path: str, base_dir: str = ".") -> np.ndarray:
    """Load a tabulated preset array (.npy, or comma-separated text with optional '#' header).

    Raises helpful errors if the file is missing or of an unknown type.
    """
    full = _resolve(path, base_dir)
    if not os.path.exists(full):
        raise FileNotFoundError(
            f"Missing tabulated data file: {path}\nLooked under: {os.path.abspath(base_dir)}"
        )
    suffix = os.path.splitext(full)[1].lower()
    if suffix not in SUFFIXES:
        raise ValueError(f"Unsupported tabulated file type '{suffix}' (use one of {', '.join(SUFFIXES)})")

    if suffix == ".npy":
        return np.load(full, allow_pickle=False)
    # one row (or one column) -> 1-d profile, several rows -> space-time table
    return np.loadtxt(full, delimiter=",", comments="#", ndmin=1)
