"""R-MAT power-law edge streams and the binary edge-file format.

Edges are generated counter-style: edge ``e`` at recursion level ``l`` uses
the splitmix64 output for draw index ``e * scale + l``, seeded by
``seed``. Any slice ``[start, stop)`` of the stream can therefore be
produced independently, and the stream is identical across platforms and
worker counts. Quadrants are picked by comparing the top 63 bits of each
draw against integer thresholds, so no floating point touches the choice.

Edge file layout (little-endian)::

    offset 0   8 bytes   magic b"HHGBEDG1"
    offset 8   u32       version (1)
    offset 12  u32       scale
    offset 16  u64       number of records
    offset 24  records   u64 row, u64 col, i64 val (24 bytes each)
"""
import math
import os
import struct
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from .errors import FormatError

MAGIC = b"HHGBEDG1"
VERSION = 1
HEADER = struct.Struct("<8sIIQ")
HEADER_SIZE = HEADER.size
RECORD_DTYPE = np.dtype([("row", "<u8"), ("col", "<u8"), ("val", "<i8")])
RECORD_SIZE = RECORD_DTYPE.itemsize

GRAPH500_PROBS = (0.57, 0.19, 0.19, 0.05)
MAX_SCALE = 60

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@dataclass(frozen=True)
class RmatParams:
    scale: int
    num_edges: int
    probs: tuple = GRAPH500_PROBS
    seed: int = 1

    def __post_init__(self):
        if not 0 <= self.scale <= MAX_SCALE:
            raise ValueError(f"scale must be in [0, {MAX_SCALE}], got {self.scale}")
        if self.num_edges < 0:
            raise ValueError(f"num_edges must be >= 0, got {self.num_edges}")
        probs = tuple(float(p) for p in self.probs)
        if len(probs) != 4:
            raise ValueError(f"need four quadrant probabilities, got {len(probs)}")
        if any(p < 0 or not math.isfinite(p) for p in probs):
            raise ValueError(f"quadrant probabilities must be finite and >= 0: {probs}")
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise ValueError(f"quadrant probabilities must sum to 1, got {math.fsum(probs)!r}")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "seed", int(self.seed) & 0xFFFFFFFFFFFFFFFF)

    @property
    def dimension(self):
        return 1 << self.scale

    def thresholds(self):
        """Cumulative quadrant thresholds scaled to 2**63, computed exactly."""
        out = []
        acc = Fraction(0)
        for p in self.probs[:3]:
            acc += Fraction(p)
            out.append(min(math.floor(acc * (1 << 63)), 1 << 63))
        return out


@dataclass(frozen=True)
class EdgeStreamHeader:
    magic: bytes
    version: int
    scale: int
    num_edges: int


@njit(cache=True, nogil=True)
def _splitmix(x):
    z = x
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def _rmat_kernel(seed, scale, t1, t2, t3, start, stop):
    n = stop - start
    rows = np.empty(n, np.int64)
    cols = np.empty(n, np.int64)
    s = np.uint64(scale)
    one = np.uint64(1)
    for k in range(n):
        e = np.uint64(start + k)
        counter = e * s
        r = np.int64(0)
        c = np.int64(0)
        for level in range(scale):
            counter += one
            u = _splitmix(seed + counter * _GAMMA) >> one
            r <<= 1
            c <<= 1
            if u < t1:
                pass
            elif u < t2:
                c |= 1
            elif u < t3:
                r |= 1
            else:
                r |= 1
                c |= 1
        rows[k] = r
        cols[k] = c
    return rows, cols


def rmat_generate(params, start=0, stop=None):
    """Edges ``[start, stop)`` of the stream as ``(rows, cols, vals)`` int64 arrays.

    Every value is 1; repeated edges are expected and left in place.
    """
    if stop is None:
        stop = params.num_edges
    if not 0 <= start <= stop <= params.num_edges:
        raise ValueError(f"edge range [{start}, {stop}) outside [0, {params.num_edges})")
    t1, t2, t3 = (np.uint64(t) for t in params.thresholds())
    rows, cols = _rmat_kernel(np.uint64(params.seed), params.scale, t1, t2, t3, start, stop)
    return rows, cols, np.ones(stop - start, np.int64)


def rmat_batches(params, batch_size, start=0, stop=None):
    """Yield the stream in consecutive ``batch_size`` chunks."""
    if stop is None:
        stop = params.num_edges
    for lo in range(start, stop, batch_size):
        yield rmat_generate(params, lo, min(lo + batch_size, stop))


def write_edge_file(path, scale, triples):
    """Write ``(rows, cols, vals)`` arrays to ``path``.

    ``scale`` may be an int or anything with a ``scale`` attribute
    (e.g. :class:`RmatParams`).
    """
    scale = getattr(scale, "scale", scale)
    rows, cols, vals = triples
    n = len(rows)
    records = np.empty(n, RECORD_DTYPE)
    records["row"] = rows
    records["col"] = cols
    records["val"] = vals
    with open(path, "wb") as f:
        f.write(HEADER.pack(MAGIC, VERSION, scale, n))
        f.write(records.tobytes())


def read_header(path):
    size = os.path.getsize(path)
    with open(path, "rb") as f:
        raw = f.read(HEADER_SIZE)
    if len(raw) < HEADER_SIZE:
        raise FormatError(f"truncated header: {len(raw)} of {HEADER_SIZE} bytes", len(raw))
    magic, version, scale, n = HEADER.unpack(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", 0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 8)
    expected = HEADER_SIZE + n * RECORD_SIZE
    if size < expected:
        complete = (size - HEADER_SIZE) // RECORD_SIZE
        raise FormatError(f"truncated: header declares {n} records, file holds {complete}",
                          HEADER_SIZE + complete * RECORD_SIZE)
    if size > expected:
        raise FormatError(f"{size - expected} trailing bytes after {n} records", expected)
    return EdgeStreamHeader(magic, version, scale, n)


def read_edge_file(path, start=0, stop=None):
    """Return ``(header, (rows, cols, vals))``, optionally only records ``[start, stop)``."""
    header = read_header(path)
    if stop is None:
        stop = header.num_edges
    if not 0 <= start <= stop <= header.num_edges:
        raise ValueError(f"record range [{start}, {stop}) outside [0, {header.num_edges})")
    with open(path, "rb") as f:
        f.seek(HEADER_SIZE + start * RECORD_SIZE)
        records = np.fromfile(f, dtype=RECORD_DTYPE, count=stop - start)
    rows = records["row"].astype(np.int64)
    cols = records["col"].astype(np.int64)
    vals = records["val"].astype(np.int64)
    return header, (rows, cols, vals)


def write_tsv(path, triples):
    rows, cols, vals = triples
    with open(path, "w", newline="\n") as f:
        for r, c, v in zip(np.asarray(rows).tolist(), np.asarray(cols).tolist(),
                           np.asarray(vals).tolist()):
            f.write(f"{r}\t{c}\t{v}\n")
