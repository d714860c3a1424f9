"""Layered streaming accumulator over hypersparse matrices.

Updates land in the smallest layer. After each update one ascending pass
checks every capped layer: a layer holding more stored entries than its cut
is added into the next layer and emptied. The top layer has no cut. Summing
all layers gives the accumulated matrix.
"""
from dataclasses import dataclass

from . import _kernels
from ._validation import as_triples, check_dimension
from .errors import ScheduleError, ValueOverflowError
from .hypersparse import HypersparseMatrix, merge

_INT63 = 1 << 63


@dataclass(frozen=True)
class CutSchedule:
    """Strictly increasing stored-entry thresholds, one per capped layer."""

    cuts: tuple

    def __post_init__(self):
        cuts = tuple(int(c) for c in self.cuts)
        if not cuts:
            raise ScheduleError("a cut schedule needs at least one cut")
        if cuts[0] < 1:
            raise ScheduleError(f"cuts must be >= 1, got {cuts[0]}")
        for lo, hi in zip(cuts, cuts[1:]):
            if hi <= lo:
                raise ScheduleError(f"cuts must be strictly increasing: {lo} then {hi}")
        object.__setattr__(self, "cuts", cuts)

    @classmethod
    def from_ratio(cls, base, ratio, kmin, kmax):
        """Cuts ``base * ratio**k`` for ``k = kmin .. kmax``."""
        if base < 1:
            raise ScheduleError(f"base must be >= 1, got {base}")
        if ratio < 2:
            raise ScheduleError(f"ratio must be >= 2, got {ratio}")
        if kmin < 0 or kmin > kmax:
            raise ScheduleError(f"need 0 <= kmin <= kmax, got {kmin}..{kmax}")
        top = base * ratio ** kmax
        if top >= _INT63:
            raise OverflowError(f"cut {base}*{ratio}**{kmax} does not fit in 63 bits")
        return cls(tuple(base * ratio ** k for k in range(kmin, kmax + 1)))

    def __len__(self):
        return len(self.cuts)

    def __iter__(self):
        return iter(self.cuts)

    def __str__(self):
        return ",".join(str(c) for c in self.cuts)


def cut_schedule_from_ratio(base, ratio, kmin, kmax):
    return CutSchedule.from_ratio(base, ratio, kmin, kmax)


@dataclass(frozen=True)
class UpdateStats:
    """What one update did.

    ``received[i]`` is the number of stored entries merged into layer ``i``
    (layer 0 receives the assembled batch). ``cascades[i]`` is 1 when layer
    ``i`` overflowed into layer ``i + 1`` during this update.
    """

    received: tuple
    cascades: tuple


class HierarchicalMatrix:
    def __init__(self, nrows, ncols, cuts):
        self.nrows = check_dimension(nrows, "nrows")
        self.ncols = check_dimension(ncols, "ncols")
        self.cuts = cuts if isinstance(cuts, CutSchedule) else CutSchedule(tuple(cuts))
        self.layers = [HypersparseMatrix(self.nrows, self.ncols)
                       for _ in range(len(self.cuts) + 1)]
        self.total_ingested = 0
        self.cascade_totals = [0] * len(self.cuts)

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def depth(self):
        return len(self.layers)

    def layer_entries(self):
        return [layer.entries_count() for layer in self.layers]

    def update(self, batch):
        """Add a batch of ``(row, col, val)`` triples and cascade overflowing layers.

        The batch is validated and assembled before any layer is touched, so
        a rejected batch leaves the hierarchy as it was.
        """
        rows, cols, vals = as_triples(batch)
        incoming = HypersparseMatrix.from_triples(self.nrows, self.ncols, (rows, cols, vals))
        batch_total, status = _kernels.checked_sum(vals)
        if status == _kernels.OVERFLOW:
            raise ValueOverflowError("int64 overflow while summing batch values")
        return self.update_matrix(incoming, int(batch_total))

    def update_matrix(self, incoming, total=None):
        """Like :meth:`update` for a batch already assembled into a matrix."""
        if total is None:
            total = incoming.total()
        layers = self.layers
        cuts = self.cuts.cuts
        received = [0] * len(layers)
        cascades = [0] * len(cuts)

        layers[0] = merge(layers[0], incoming)[0]
        received[0] = incoming.entries_count()
        self.total_ingested += total
        for i, cut in enumerate(cuts):
            n = layers[i].entries_count()
            if n > cut:
                layers[i + 1] = merge(layers[i + 1], layers[i])[0]
                layers[i] = HypersparseMatrix(self.nrows, self.ncols)
                received[i + 1] += n
                cascades[i] = 1
                self.cascade_totals[i] += 1
        return UpdateStats(tuple(received), tuple(cascades))

    def flush(self):
        """Sum of all layers as one matrix. The hierarchy is not modified."""
        result = HypersparseMatrix(self.nrows, self.ncols)
        for layer in self.layers:
            result = merge(result, layer)[0]
        return result

    def reset(self):
        for layer in self.layers:
            layer.clear()
        self.total_ingested = 0
        self.cascade_totals = [0] * len(self.cuts)

    def __repr__(self):
        return (f"HierarchicalMatrix(nrows={self.nrows}, ncols={self.ncols}, "
                f"cuts={list(self.cuts.cuts)}, entries={self.layer_entries()})")


def new_hier(nrows, ncols, cuts):
    return HierarchicalMatrix(nrows, ncols, cuts)


def update(h, batch):
    return h.update(batch)


def flush(h):
    return h.flush()


def reset(h):
    h.reset()
