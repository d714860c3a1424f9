"""Input coercion helpers shared by the matrix, hierarchy, and bench layers."""
from typing import NamedTuple

import numpy as np

from .errors import IndexOutOfBoundsError, InvalidDimensionError

MAX_DIM = 1 << 60


class Triple(NamedTuple):
    row: int
    col: int
    val: int


def check_dimension(n, name="dimension"):
    if isinstance(n, (bool, np.bool_)) or not isinstance(n, (int, np.integer)):
        raise InvalidDimensionError(f"{name} must be an integer, got {n!r}")
    n = int(n)
    if n < 1 or n > MAX_DIM:
        raise InvalidDimensionError(f"{name} must be in [1, 2**60], got {n}")
    return n


def _int64_column(values, what):
    arr = np.asarray(values)
    if arr.size and arr.dtype.kind not in "iu":
        raise TypeError(f"{what} must be integers, got dtype {arr.dtype}")
    return np.ascontiguousarray(arr, dtype=np.int64)


def as_triples(batch):
    """Coerce a batch into three contiguous int64 arrays ``(rows, cols, vals)``.

    Accepts a ``(rows, cols, vals)`` tuple of array-likes, an ``(n, 3)``
    integer array, or any sequence of ``(row, col, val)`` tuples.
    """
    if isinstance(batch, tuple) and len(batch) == 3 and not isinstance(batch, Triple):
        parts = [np.asarray(p) if not isinstance(p, np.ndarray) else p for p in batch]
        if all(p.ndim == 1 for p in parts):
            if not (parts[0].size == parts[1].size == parts[2].size):
                raise ValueError("rows, cols and vals must have equal length")
            return (_int64_column(parts[0], "rows"), _int64_column(parts[1], "cols"),
                    _int64_column(parts[2], "vals"))
    if isinstance(batch, np.ndarray):
        if batch.size == 0:
            empty = np.empty(0, np.int64)
            return empty, empty.copy(), empty.copy()
        if batch.ndim != 2 or batch.shape[1] != 3:
            raise ValueError(f"triple array must have shape (n, 3), got {batch.shape}")
        return (_int64_column(batch[:, 0], "rows"), _int64_column(batch[:, 1], "cols"),
                _int64_column(batch[:, 2], "vals"))
    batch = list(batch)
    if not batch:
        empty = np.empty(0, np.int64)
        return empty, empty.copy(), empty.copy()
    try:
        arr = np.array(batch, dtype=np.int64)
    except OverflowError:
        for pos, (r, c, v) in enumerate(batch):
            if not (0 <= r < MAX_DIM and 0 <= c < MAX_DIM):
                raise IndexOutOfBoundsError(
                    f"triple {pos} ({r}, {c}) is out of bounds", position=pos) from None
        raise
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError("each triple must have exactly three fields (row, col, val)")
    return (np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1]),
            np.ascontiguousarray(arr[:, 2]))
