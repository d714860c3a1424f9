"""Timed batched ingest, cut-schedule sweeps, and thread-sharded scaling runs.

The workload is fully materialized and pre-sliced into batches before any
clock starts; the timed region covers only the update calls. Flushing the
accumulators (and merging shards) is timed separately.
"""
import logging
import os
import statistics
import threading
import time
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .errors import ScheduleError, WorkloadError
from .hierarchy import CutSchedule, HierarchicalMatrix
from .hypersparse import HypersparseMatrix, merge
from .streamgen import RmatParams, read_edge_file, read_header, rmat_generate

log = logging.getLogger(__name__)

DESK_SCALE = 22
DESK_EDGES = 10_000_000
DESK_BATCH = 100_000
DESK_BASE = 1 << 13
DESK_RATIO = 4
DESK_KMIN = 2
DESK_NCUTS = 4


def desk_schedule():
    return CutSchedule.from_ratio(DESK_BASE, DESK_RATIO, DESK_KMIN, DESK_KMIN + DESK_NCUTS - 1)


@dataclass
class BenchConfig:
    workload: Union[str, os.PathLike, RmatParams] = field(
        default_factory=lambda: RmatParams(DESK_SCALE, DESK_EDGES))
    batch_size: int = DESK_BATCH
    total_edges: Optional[int] = None  # None: the whole workload
    schedule: CutSchedule = field(default_factory=desk_schedule)
    mode: str = "hier"
    num_workers: int = 1
    trial_count: int = 3
    warmup_batches: int = 1
    verify: bool = False

    def __post_init__(self):
        if self.mode not in ("hier", "flat"):
            raise ValueError(f"mode must be 'hier' or 'flat', got {self.mode!r}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.total_edges is not None and self.total_edges < self.batch_size:
            raise ValueError("total_edges must be >= batch_size")
        if self.trial_count < 1:
            raise ValueError("trial_count must be >= 1")
        if self.num_workers < 1:
            raise ValueError("num_workers must be >= 1")
        if self.warmup_batches < 0:
            raise ValueError("warmup_batches must be >= 0")


@dataclass
class Workload:
    """An in-memory edge stream and the matrix dimensions it lives in."""

    nrows: int
    ncols: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    def __len__(self):
        return len(self.rows)

    def head(self, n):
        return Workload(self.nrows, self.ncols, self.rows[:n], self.cols[:n], self.vals[:n])

    def batches(self, batch_size):
        return [(self.rows[lo:lo + batch_size], self.cols[lo:lo + batch_size],
                 self.vals[lo:lo + batch_size])
                for lo in range(0, len(self), batch_size)]


def load_workload(source, total_edges=None, start=0):
    """Materialize ``[start, start + total_edges)`` of a workload in memory.

    ``source`` is an edge-file path, :class:`RmatParams`, or a
    :class:`Workload` (sliced without copying).
    """
    if isinstance(source, Workload):
        available = len(source)
    elif isinstance(source, RmatParams):
        available = source.num_edges
    else:
        available = read_header(source).num_edges
    available -= start
    n = available if total_edges is None else total_edges
    if n > available:
        raise WorkloadError(f"workload holds {max(available, 0)} edges from offset {start}, "
                            f"{n} requested")
    if isinstance(source, Workload):
        return Workload(source.nrows, source.ncols, source.rows[start:start + n],
                        source.cols[start:start + n], source.vals[start:start + n])
    if isinstance(source, RmatParams):
        dim = source.dimension
        rows, cols, vals = rmat_generate(source, start, start + n)
    else:
        header, (rows, cols, vals) = read_edge_file(source, start, start + n)
        dim = 1 << header.scale
    return Workload(dim, dim, rows, cols, vals)


def reference_accumulate(workload):
    """Accumulate a whole stream with plain numpy (no merge kernels).

    Used to cross-check benchmark results against an independent path.
    """
    if len(workload) == 0:
        return HypersparseMatrix(workload.nrows, workload.ncols)
    rows, cols, vals = workload.rows, workload.cols, workload.vals
    if workload.nrows * workload.ncols < 2**63:
        order = np.argsort(rows * workload.ncols + cols, kind="stable")
    else:
        order = np.lexsort((cols, rows))
    r, c, v = rows[order], cols[order], vals[order]
    starts = np.flatnonzero(np.concatenate(([True], (r[1:] != r[:-1]) | (c[1:] != c[:-1]))))
    return HypersparseMatrix._wrap(workload.nrows, workload.ncols, r[starts], c[starts],
                                   np.add.reduceat(v, starts))


@dataclass
class ThroughputSample:
    mode: str
    workers: int
    batch_size: int
    cuts: tuple
    edges_ingested: int
    wall_seconds: float
    updates_per_second: float
    cascade_counts: tuple
    flush_seconds: float
    trial: int = 0


@dataclass
class BenchResult:
    samples: list
    matrix: HypersparseMatrix  # merged flush of the last trial
    verified: Optional[bool] = None

    @property
    def median_rate(self):
        return statistics.median(s.updates_per_second for s in self.samples)

    @property
    def median_sample(self):
        ranked = sorted(self.samples, key=lambda s: s.updates_per_second)
        return ranked[(len(ranked) - 1) // 2]


class _FlatAccumulator:
    """The no-hierarchy baseline: every batch is added straight into one matrix."""

    def __init__(self, nrows, ncols):
        self.matrix = HypersparseMatrix(nrows, ncols)

    def update(self, batch):
        incoming = HypersparseMatrix.from_triples(self.matrix.nrows, self.matrix.ncols, batch)
        self.matrix = merge(self.matrix, incoming)[0]

    def flush(self):
        return self.matrix

    cascade_totals = ()


def _make_accumulator(config, workload):
    if config.mode == "flat":
        return _FlatAccumulator(workload.nrows, workload.ncols)
    return HierarchicalMatrix(workload.nrows, workload.ncols, config.schedule)


def _ingest(acc, batches):
    for batch in batches:
        acc.update(batch)


def _run_trial(config, workload, batches, trial):
    workers = config.num_workers
    accs = [_make_accumulator(config, workload) for _ in range(workers)]
    if workers == 1:
        t0 = time.perf_counter_ns()
        _ingest(accs[0], batches)
        t1 = time.perf_counter_ns()
    else:
        shards = [batches[w::workers] for w in range(workers)]
        errors = []

        def work(acc, shard):
            try:
                _ingest(acc, shard)
            except BaseException as exc:  # re-raised on the calling thread
                errors.append(exc)

        threads = [threading.Thread(target=work, args=(acc, shard), daemon=True)
                   for acc, shard in zip(accs, shards)]
        t0 = time.perf_counter_ns()
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        t1 = time.perf_counter_ns()
        if errors:
            raise errors[0]

    f0 = time.perf_counter_ns()
    merged = HypersparseMatrix(workload.nrows, workload.ncols)
    for acc in accs:
        merged = merge(merged, acc.flush())[0]
    f1 = time.perf_counter_ns()

    wall = max(t1 - t0, 1) / 1e9
    cascades = tuple(int(sum(c)) for c in zip(*(acc.cascade_totals for acc in accs)))
    sample = ThroughputSample(
        mode=config.mode, workers=workers, batch_size=config.batch_size,
        cuts=config.schedule.cuts if config.mode == "hier" else (),
        edges_ingested=len(workload), wall_seconds=wall,
        updates_per_second=len(workload) / wall, cascade_counts=cascades,
        flush_seconds=(f1 - f0) / 1e9, trial=trial)
    return sample, merged


def run_ingest(config, workload=None, reference=None):
    """Run ``config.trial_count`` timed ingests of the same workload.

    ``workload`` may be passed pre-loaded to share it between runs;
    otherwise it is loaded from ``config.workload``. With ``config.verify``
    the final merged flush is compared against ``reference`` (computed with
    :func:`reference_accumulate` if not given).
    """
    workload = load_workload(workload if workload is not None else config.workload,
                             config.total_edges)
    batches = workload.batches(config.batch_size)
    if config.warmup_batches:
        scratch = _make_accumulator(config, workload)
        _ingest(scratch, batches[:config.warmup_batches])
    samples = []
    merged = None
    for trial in range(config.trial_count):
        sample, merged = _run_trial(config, workload, batches, trial)
        log.info("trial %d: %s x%d %.3g updates/s", trial, config.mode, config.num_workers,
                 sample.updates_per_second)
        samples.append(sample)
    verified = None
    if config.verify:
        if reference is None:
            reference = reference_accumulate(workload)
        verified = merged == reference
    return BenchResult(samples, merged, verified)


@dataclass
class SweepPoint:
    base: int
    ratio: int
    ncuts: int
    result: Optional[BenchResult]
    error: Optional[str] = None


def run_sweep(base_list, ratio_list, cut_count_list, workload, batch_size=DESK_BATCH,
              kmin=DESK_KMIN, trial_count=1, verify=False, total_edges=None):
    """One benchmark per (base, ratio, cut count) over the same workload.

    Cut count ``n`` uses exponents ``kmin .. kmin + n - 1``. Combinations
    whose schedule cannot be built are kept with ``error`` set.
    """
    wl = load_workload(workload, total_edges)
    reference = reference_accumulate(wl) if verify else None
    points = []
    for base in base_list:
        for ratio in ratio_list:
            for ncuts in cut_count_list:
                try:
                    schedule = CutSchedule.from_ratio(base, ratio, kmin, kmin + ncuts - 1)
                except (ScheduleError, OverflowError) as exc:
                    log.warning("skipping base=%d ratio=%d ncuts=%d: %s", base, ratio, ncuts, exc)
                    points.append(SweepPoint(base, ratio, ncuts, None, str(exc)))
                    continue
                config = BenchConfig(workload=workload, batch_size=batch_size, schedule=schedule,
                                     mode="hier", trial_count=trial_count, verify=verify)
                result = run_ingest(config, wl, reference)
                points.append(SweepPoint(base, ratio, ncuts, result))
    return points


def run_vertical(worker_counts, config, workload=None):
    """One benchmark per worker count, each sharding batches round-robin."""
    limit = 2 * (os.cpu_count() or 1)
    for w in worker_counts:
        if w < 1:
            raise ValueError(f"worker counts must be >= 1, got {w}")
        if w > limit:
            warnings.warn(f"{w} workers exceeds twice the {os.cpu_count()} available CPUs",
                          RuntimeWarning, stacklevel=2)
    wl = load_workload(workload if workload is not None else config.workload, config.total_edges)
    reference = reference_accumulate(wl) if config.verify else None
    return [run_ingest(replace(config, num_workers=w), wl, reference) for w in worker_counts]
