"""Multi-process ingest with file-based result collection.

The coordinator writes the job's benchmark config to ``<job_id>.conf`` in
the result directory and starts one OS process per worker::

    python -m hierhyper.cluster --worker-index N --shard-start S \\
        --shard-end E --result-dir D --config F

Each worker loads its contiguous shard ``[S, E)`` of the workload, ingests
it into a private hierarchical matrix, and reports through a single
JSON-lines file ``w<N>.result``. The file is written under a temporary name
and renamed into place, so the coordinator never sees a partial result.
With ``verify`` set, a worker also leaves its flushed matrix in
``w<N>.flush`` (edge-file format) for the coordinator to cross-check.
"""
import argparse
import json
import logging
import os
import re
import subprocess
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .bench import BenchConfig, load_workload, reference_accumulate
from .errors import LaunchError
from .hierarchy import CutSchedule, HierarchicalMatrix
from .hypersparse import HypersparseMatrix, merge
from .streamgen import RmatParams, read_edge_file, read_header, write_edge_file

log = logging.getLogger(__name__)

_JOB_ID = re.compile(r"^[A-Za-z0-9_.-]+$")


# key=value config files ----------------------------------------------------

def config_to_text(config, verify=None):
    """Serialize a :class:`BenchConfig` as ``key=value`` lines using the bench flag names."""
    lines = []
    wl = config.workload
    if isinstance(wl, RmatParams):
        lines += ["rmat=1", f"scale={wl.scale}", f"edges={wl.num_edges}", f"seed={wl.seed}",
                  "probs=" + ",".join(repr(p) for p in wl.probs)]
        if config.total_edges is not None:
            lines.append(f"total-edges={config.total_edges}")
    else:
        lines.append(f"in={os.fspath(wl)}")
        if config.total_edges is not None:
            lines.append(f"edges={config.total_edges}")
    lines += [f"batch={config.batch_size}",
              "cut-list=" + ",".join(str(c) for c in config.schedule.cuts),
              f"mode={config.mode}",
              f"workers={config.num_workers}",
              f"trials={config.trial_count}",
              f"warmup={config.warmup_batches}",
              f"verify={int(config.verify if verify is None else verify)}"]
    return "\n".join(lines) + "\n"


def config_from_text(text):
    kv = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"config line {lineno}: expected key=value, got {line!r}")
        kv[key.strip().lstrip("-")] = value.strip()

    total = None
    if "in" in kv:
        workload = kv["in"]
        total = int(kv["edges"]) if "edges" in kv else None
    elif kv.get("rmat", "0") not in ("0", ""):
        probs = tuple(float(p) for p in kv["probs"].split(",")) if "probs" in kv else None
        workload = RmatParams(int(kv.get("scale", 22)), int(kv.get("edges", 10_000_000)),
                              **({"probs": probs} if probs else {}),
                              seed=int(kv.get("seed", 1)))
        total = int(kv["total-edges"]) if "total-edges" in kv else None
    else:
        raise ValueError("config needs either in=PATH or rmat=1")

    kwargs = dict(workload=workload, total_edges=total)
    if "cut-list" in kv:
        kwargs["schedule"] = CutSchedule(tuple(int(c) for c in kv["cut-list"].split(",")))
    elif "cuts" in kv:
        kwargs["schedule"] = CutSchedule.from_ratio(*(int(c) for c in kv["cuts"].split(",")))
    for key, attr, conv in [("batch", "batch_size", int), ("mode", "mode", str),
                            ("workers", "num_workers", int), ("trials", "trial_count", int),
                            ("warmup", "warmup_batches", int),
                            ("verify", "verify", lambda v: v not in ("0", "", "false"))]:
        if key in kv:
            kwargs[attr] = conv(kv[key])
    return BenchConfig(**kwargs)


def workload_size(config):
    wl = config.workload
    available = wl.num_edges if isinstance(wl, RmatParams) else read_header(wl).num_edges
    return available if config.total_edges is None else config.total_edges


def shard_bounds(total_edges, batch_size, num_shards):
    """Split ``[0, total_edges)`` into contiguous shards aligned to batch boundaries."""
    nbatches = -(-total_edges // batch_size)
    q, r = divmod(nbatches, num_shards)
    bounds = []
    b = 0
    for i in range(num_shards):
        nb = q + (1 if i < r else 0)
        start = min(b * batch_size, total_edges)
        end = min((b + nb) * batch_size, total_edges)
        bounds.append((start, end))
        b += nb
    return bounds


# coordinator ------------------------------------------------------------------

@dataclass
class JobSpec:
    job_id: str
    num_processes: int
    config: BenchConfig
    result_dir: Path
    poll_interval: float = 100.0  # milliseconds
    timeout: float = 300.0  # seconds
    verify: bool = False

    def __post_init__(self):
        if not _JOB_ID.match(self.job_id):
            raise ValueError(f"job_id {self.job_id!r} is not filesystem-safe")
        if self.num_processes < 1:
            raise ValueError("num_processes must be >= 1")
        self.result_dir = Path(self.result_dir)


@dataclass
class WorkerResult:
    worker_index: int
    edges: int = 0
    wall_seconds: float = 0.0
    rate: float = 0.0
    flush_seconds: float = 0.0
    cascades: list = field(default_factory=list)
    start_ns: int = 0
    end_ns: int = 0
    status: str = "ok"

    @property
    def ok(self):
        return self.status == "ok"

    def to_json(self):
        return json.dumps({"worker_index": self.worker_index, "edges": self.edges,
                           "wall_seconds": self.wall_seconds, "rate": self.rate,
                           "flush_seconds": self.flush_seconds, "cascades": self.cascades,
                           "start_ns": self.start_ns, "end_ns": self.end_ns,
                           "status": self.status})

    @classmethod
    def from_json(cls, line):
        d = json.loads(line)
        res = cls(worker_index=int(d["worker_index"]), edges=int(d["edges"]),
                  wall_seconds=float(d["wall_seconds"]), rate=float(d["rate"]),
                  flush_seconds=float(d["flush_seconds"]),
                  cascades=[int(c) for c in d["cascades"]],
                  start_ns=int(d["start_ns"]), end_ns=int(d["end_ns"]), status=str(d["status"]))
        if res.end_ns < res.start_ns:
            raise ValueError(f"end_ns {res.end_ns} precedes start_ns {res.start_ns}")
        return res


@dataclass
class JobHandle:
    job: JobSpec
    shards: list
    config_path: Path
    processes: list = field(default_factory=list)


@dataclass
class JobReport:
    job_id: str
    num_processes: int
    workers: list
    complete: bool
    expected_edges: int
    verified: Optional[bool] = None

    @property
    def ok(self):
        return self.complete and all(w.ok for w in self.workers)

    @property
    def total_edges(self):
        return sum(w.edges for w in self.workers if w.ok)

    @property
    def span_seconds(self):
        done = [w for w in self.workers if w.ok]
        if not done:
            return 0.0
        return (max(w.end_ns for w in done) - min(w.start_ns for w in done)) / 1e9

    @property
    def span_rate(self):
        span = self.span_seconds
        return self.total_edges / span if span > 0 else 0.0

    @property
    def sum_rate(self):
        return sum(w.rate for w in self.workers if w.ok)


def result_path(result_dir, index):
    return Path(result_dir) / f"w{index}.result"


def flush_path(result_dir, index):
    return Path(result_dir) / f"w{index}.flush"


def launch(job):
    """Write the job config and start one worker process per shard."""
    job.result_dir.mkdir(parents=True, exist_ok=True)
    stale = sorted(job.result_dir.glob("w*.result"))
    if stale:
        raise FileExistsError(f"{job.result_dir} already holds results ({stale[0].name})")
    config_path = job.result_dir / f"{job.job_id}.conf"
    config_path.write_text(config_to_text(job.config, verify=job.verify))
    shards = shard_bounds(workload_size(job.config), job.config.batch_size, job.num_processes)
    handle = JobHandle(job, shards, config_path)
    for index, (start, end) in enumerate(shards):
        cmd = [sys.executable, "-m", "hierhyper.cluster",
               "--worker-index", str(index), "--shard-start", str(start),
               "--shard-end", str(end), "--result-dir", str(job.result_dir),
               "--config", str(config_path)]
        try:
            handle.processes.append(subprocess.Popen(cmd))
        except OSError as exc:
            for proc in handle.processes:
                proc.kill()
            raise LaunchError(f"could not start worker {index}: {exc}", index) from exc
    log.info("launched job %s: %d workers", job.job_id, job.num_processes)
    return handle


def _read_result(path, index):
    try:
        lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
        if len(lines) != 1:
            raise ValueError(f"expected one JSON line, found {len(lines)}")
        res = WorkerResult.from_json(lines[0])
        if res.worker_index != index:
            raise ValueError(f"file is for worker {res.worker_index}")
        return res
    except (ValueError, KeyError, TypeError) as exc:
        return WorkerResult(index, status=f"failed: parse error: {exc}")


def collect(handle, timeout=None):
    """Poll the result directory until every worker has reported or ``timeout`` passes.

    A worker whose process exits without leaving a result is reported
    failed right away; workers still silent at the deadline are reported
    ``failed: timeout`` and the report is marked incomplete.
    """
    job = handle.job
    timeout = job.timeout if timeout is None else timeout
    deadline = time.monotonic() + timeout
    n = job.num_processes
    results = {}
    while True:
        for i in range(n):
            if i not in results and result_path(job.result_dir, i).exists():
                results[i] = _read_result(result_path(job.result_dir, i), i)
        for i, proc in enumerate(handle.processes):
            if i not in results and proc.poll() is not None:
                if result_path(job.result_dir, i).exists():
                    results[i] = _read_result(result_path(job.result_dir, i), i)
                else:
                    results[i] = WorkerResult(i, status=f"failed: exited with code {proc.returncode}")
        if len(results) == n or time.monotonic() >= deadline:
            break
        time.sleep(job.poll_interval / 1000.0)

    complete = len(results) == n
    workers = [results.get(i, WorkerResult(i, status="failed: timeout")) for i in range(n)]
    report = JobReport(job.job_id, n, workers, complete, workload_size(job.config))
    if job.verify and report.ok:
        report.verified = verify_job(handle)
    return report


def verify_job(handle):
    """Compare the sum of the workers' flushed shards with a whole-stream reference."""
    job = handle.job
    workload = load_workload(job.config.workload, workload_size(job.config))
    merged = HypersparseMatrix(workload.nrows, workload.ncols)
    for i in range(job.num_processes):
        path = flush_path(job.result_dir, i)
        if not path.exists():
            return False
        _, triples = read_edge_file(path)
        merged = merge(merged, HypersparseMatrix.from_triples(workload.nrows, workload.ncols,
                                                             triples))[0]
    return merged == reference_accumulate(workload)


def terminate(handle):
    for proc in handle.processes:
        if proc.poll() is None:
            proc.kill()
        proc.wait()


# worker -------------------------------------------------------------------------

def _write_atomic(path, text):
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def run_worker(worker_index, shard_start, shard_end, result_dir, config_path):
    result_dir = Path(result_dir)
    out = result_path(result_dir, worker_index)
    try:
        config = config_from_text(Path(config_path).read_text())
        workload = load_workload(config.workload, shard_end - shard_start, start=shard_start)
        batches = workload.batches(config.batch_size)
        if config.warmup_batches and batches:
            scratch = HierarchicalMatrix(workload.nrows, workload.ncols, config.schedule)
            for batch in batches[:config.warmup_batches]:
                scratch.update(batch)
        h = HierarchicalMatrix(workload.nrows, workload.ncols, config.schedule)

        start_ns = time.monotonic_ns()
        for batch in batches:
            h.update(batch)
        end_ns = time.monotonic_ns()

        f0 = time.perf_counter_ns()
        flushed = h.flush()
        f1 = time.perf_counter_ns()
        if config.verify:
            scale = max(workload.nrows.bit_length() - 1, 0)
            write_edge_file(flush_path(result_dir, worker_index), scale,
                            (flushed.rows, flushed.cols, flushed.vals))
        wall = max(end_ns - start_ns, 1) / 1e9
        result = WorkerResult(worker_index, edges=len(workload), wall_seconds=wall,
                              rate=len(workload) / wall, flush_seconds=(f1 - f0) / 1e9,
                              cascades=list(h.cascade_totals), start_ns=start_ns,
                              end_ns=end_ns)
    except Exception as exc:
        log.exception("worker %d failed", worker_index)
        now = time.monotonic_ns()
        result = WorkerResult(worker_index, start_ns=now, end_ns=now,
                              status=f"failed: {type(exc).__name__}: {exc}")
    _write_atomic(out, result.to_json() + "\n")
    return result


def worker_main(argv=None):
    parser = argparse.ArgumentParser(prog="hierhyper-worker")
    parser.add_argument("--worker-index", type=int, required=True)
    parser.add_argument("--shard-start", type=int, required=True)
    parser.add_argument("--shard-end", type=int, required=True)
    parser.add_argument("--result-dir", required=True)
    parser.add_argument("--config", required=True)
    args = parser.parse_args(argv)
    result = run_worker(args.worker_index, args.shard_start, args.shard_end,
                        args.result_dir, args.config)
    return 0 if result.ok else 1


if __name__ == "__main__":
    sys.exit(worker_main())
