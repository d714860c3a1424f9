"""Hypersparse integer matrices stored as a sorted coordinate list.

Only present entries are stored, so a 2**60 x 2**60 matrix with no entries
costs a few bytes. Entries are kept sorted by (row, col) with unique
coordinates. Stored zeros produced by cancelling values are kept: the
stored-entry count is what the hierarchy thresholds on, and it has to stay
O(1). A doubly-compressed (DCSR/DCSC) layout would also satisfy this
interface; the coordinate list is used because build, merge, and count are
the only operations needed.
"""
import numpy as np

from . import _kernels
from ._validation import Triple, as_triples, check_dimension
from .errors import IndexOutOfBoundsError, ShapeError, ValueOverflowError

__all__ = [
    "HypersparseMatrix",
    "Triple",
    "add_assign",
    "entries_count",
    "from_triples",
    "get",
    "iterate",
    "merge",
    "new_matrix",
    "nnz_count",
]

_INT64_MAX = (1 << 63) - 1
_EMPTY = np.empty(0, np.int64)


class HypersparseMatrix:
    """An ``nrows x ncols`` int64 matrix holding only its stored entries.

    The coordinate arrays are treated as immutable; operations that change
    the matrix swap in freshly built arrays, so arrays may be shared safely
    between matrices.
    """

    __slots__ = ("nrows", "ncols", "rows", "cols", "vals")

    def __init__(self, nrows, ncols):
        self.nrows = check_dimension(nrows, "nrows")
        self.ncols = check_dimension(ncols, "ncols")
        self.rows = _EMPTY
        self.cols = _EMPTY
        self.vals = _EMPTY

    @classmethod
    def _wrap(cls, nrows, ncols, rows, cols, vals):
        m = cls.__new__(cls)
        m.nrows = nrows
        m.ncols = ncols
        m.rows = rows
        m.cols = cols
        m.vals = vals
        return m

    @classmethod
    def from_triples(cls, nrows, ncols, batch):
        """Build a matrix from triples, summing values at repeated coordinates."""
        nrows = check_dimension(nrows, "nrows")
        ncols = check_dimension(ncols, "ncols")
        rows, cols, vals = as_triples(batch)
        if rows.size == 0:
            return cls(nrows, ncols)
        bad = _kernels.first_out_of_bounds(rows, cols, nrows, ncols)
        if bad >= 0:
            raise IndexOutOfBoundsError(
                f"triple {bad} ({rows[bad]}, {cols[bad]}) is outside a "
                f"{nrows} x {ncols} matrix", position=int(bad))
        if nrows * ncols <= _INT64_MAX:
            order = np.argsort(rows * ncols + cols)
        else:
            order = np.lexsort((cols, rows))
        r, c, v, status = _kernels.accumulate_sorted(rows, cols, vals, order)
        if status == _kernels.OVERFLOW:
            raise ValueOverflowError("int64 overflow while accumulating duplicate triples")
        return cls._wrap(nrows, ncols, r, c, v)

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def nbytes(self):
        return self.rows.nbytes + self.cols.nbytes + self.vals.nbytes

    def entries_count(self):
        """Number of stored entries, including stored zeros."""
        return self.rows.size

    def nnz_count(self):
        """Number of stored entries whose value is nonzero."""
        return int(np.count_nonzero(self.vals))

    def total(self):
        """Sum of all stored values; raises on int64 overflow."""
        s, status = _kernels.checked_sum(self.vals)
        if status == _kernels.OVERFLOW:
            raise ValueOverflowError("int64 overflow while summing matrix values")
        return int(s)

    def get(self, row, col):
        if not (0 <= row < self.nrows and 0 <= col < self.ncols):
            raise IndexOutOfBoundsError(
                f"({row}, {col}) is outside a {self.nrows} x {self.ncols} matrix")
        lo = np.searchsorted(self.rows, row, side="left")
        hi = np.searchsorted(self.rows, row, side="right")
        if lo == hi:
            return None
        k = lo + np.searchsorted(self.cols[lo:hi], col, side="left")
        if k < hi and self.cols[k] == col:
            return int(self.vals[k])
        return None

    def __iter__(self):
        for r, c, v in zip(self.rows.tolist(), self.cols.tolist(), self.vals.tolist()):
            yield Triple(r, c, v)

    def to_dict(self):
        return {(r, c): v for r, c, v in self}

    def clear(self):
        self.rows = self.cols = self.vals = _EMPTY

    def copy(self):
        return self._wrap(self.nrows, self.ncols, self.rows, self.cols, self.vals)

    def __iadd__(self, other):
        return add_assign(self, other)

    def __add__(self, other):
        if not isinstance(other, HypersparseMatrix):
            return NotImplemented
        return merge(self, other)[0]

    def __eq__(self, other):
        if not isinstance(other, HypersparseMatrix):
            return NotImplemented
        return (self.shape == other.shape
                and np.array_equal(self.rows, other.rows)
                and np.array_equal(self.cols, other.cols)
                and np.array_equal(self.vals, other.vals))

    __hash__ = None

    def __repr__(self):
        return (f"HypersparseMatrix(nrows={self.nrows}, ncols={self.ncols}, "
                f"entries={self.entries_count()})")


def new_matrix(nrows, ncols):
    return HypersparseMatrix(nrows, ncols)


def from_triples(nrows, ncols, batch):
    return HypersparseMatrix.from_triples(nrows, ncols, batch)


def merge(a, b):
    """Element-wise sum of two matrices.

    Returns ``(result, comparisons)`` where ``comparisons`` counts the
    coordinate comparisons the merge performed (at most ``len(a) + len(b)``).
    """
    if a.shape != b.shape:
        raise ShapeError(f"cannot add {a.shape} and {b.shape} matrices")
    if b.rows.size == 0:
        return a.copy(), 0
    if a.rows.size == 0:
        return b.copy(), 0
    r, c, v, comparisons, status = _kernels.merge(a.rows, a.cols, a.vals,
                                                  b.rows, b.cols, b.vals)
    if status == _kernels.OVERFLOW:
        raise ValueOverflowError("int64 overflow while adding matrices")
    return HypersparseMatrix._wrap(a.nrows, a.ncols, r, c, v), int(comparisons)


def add_assign(target, source):
    """``target += source`` in place; returns ``target``.

    On error ``target`` is left unchanged.
    """
    result, _ = merge(target, source)
    target.rows, target.cols, target.vals = result.rows, result.cols, result.vals
    return target


def entries_count(a):
    return a.entries_count()


def nnz_count(a):
    return a.nnz_count()


def get(a, row, col):
    return a.get(row, col)


def iterate(a):
    return iter(a)

