"""Compiled inner loops for coordinate-list matrices.

All kernels release the GIL so thread-sharded ingest can overlap. Status
codes are returned instead of raised; the Python wrappers translate them.
"""
import numpy as np
from numba import njit

OK = 0
OVERFLOW = 1


@njit(cache=True, nogil=True)
def first_out_of_bounds(rows, cols, nrows, ncols):
    for i in range(rows.size):
        r = rows[i]
        c = cols[i]
        if r < 0 or r >= nrows or c < 0 or c >= ncols:
            return i
    return -1


@njit(cache=True, nogil=True)
def accumulate_sorted(rows, cols, vals, order):
    """Collapse triples visited in ``order`` (sorted by coordinate) into unique entries."""
    n = order.size
    out_r = np.empty(n, np.int64)
    out_c = np.empty(n, np.int64)
    out_v = np.empty(n, np.int64)
    k = -1
    for t in range(n):
        i = order[t]
        r = rows[i]
        c = cols[i]
        v = vals[i]
        if k >= 0 and out_r[k] == r and out_c[k] == c:
            a = out_v[k]
            s = a + v
            if ((a ^ s) & (v ^ s)) < 0:
                return out_r[:0], out_c[:0], out_v[:0], OVERFLOW
            out_v[k] = s
        else:
            k += 1
            out_r[k] = r
            out_c[k] = c
            out_v[k] = v
    k += 1
    return out_r[:k], out_c[:k], out_v[:k], OK


@njit(cache=True, nogil=True)
def merge(ar, ac, av, br, bc, bv):
    """Two-pointer union of two sorted coordinate lists, summing collisions.

    Returns (rows, cols, vals, comparisons, status).
    """
    m = ar.size
    n = br.size
    out_r = np.empty(m + n, np.int64)
    out_c = np.empty(m + n, np.int64)
    out_v = np.empty(m + n, np.int64)
    i = 0
    j = 0
    k = 0
    comparisons = 0
    while i < m and j < n:
        comparisons += 1
        r1 = ar[i]
        r2 = br[j]
        c1 = ac[i]
        c2 = bc[j]
        if r1 < r2 or (r1 == r2 and c1 < c2):
            out_r[k] = r1
            out_c[k] = c1
            out_v[k] = av[i]
            i += 1
        elif r1 == r2 and c1 == c2:
            a = av[i]
            b = bv[j]
            s = a + b
            if ((a ^ s) & (b ^ s)) < 0:
                return out_r[:0], out_c[:0], out_v[:0], comparisons, OVERFLOW
            out_r[k] = r1
            out_c[k] = c1
            out_v[k] = s
            i += 1
            j += 1
        else:
            out_r[k] = r2
            out_c[k] = c2
            out_v[k] = bv[j]
            j += 1
        k += 1
    while i < m:
        out_r[k] = ar[i]
        out_c[k] = ac[i]
        out_v[k] = av[i]
        i += 1
        k += 1
    while j < n:
        out_r[k] = br[j]
        out_c[k] = bc[j]
        out_v[k] = bv[j]
        j += 1
        k += 1
    return out_r[:k], out_c[:k], out_v[:k], comparisons, OK


@njit(cache=True, nogil=True)
def checked_sum(vals):
    s = np.int64(0)
    for i in range(vals.size):
        v = vals[i]
        t = s + v
        if ((s ^ t) & (v ^ t)) < 0:
            return s, OVERFLOW
        s = t
    return s, OK
