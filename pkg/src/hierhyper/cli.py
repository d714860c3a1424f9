"""``hierhyper`` command line.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.
"""
import argparse
import csv
import logging
import sys
import uuid
from pathlib import Path

from . import bench, cluster
from .errors import FormatError, ScheduleError, WorkloadError
from .hierarchy import CutSchedule
from .streamgen import GRAPH500_PROBS, RmatParams, rmat_generate, write_edge_file, write_tsv

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

BENCH_COLUMNS = ["mode", "workers", "batch", "cuts", "trial", "edges", "wall_seconds", "rate",
                 "flush_seconds", "cascades", "verified"]
SWEEP_COLUMNS = ["base", "ratio", "ncuts", "cuts", "edges", "wall_seconds", "rate",
                 "flush_seconds", "cascades", "verified", "error"]
VERTICAL_COLUMNS = ["workers", "edges", "wall_seconds", "rate", "speedup", "flush_seconds",
                    "cascades", "verified"]
CLUSTER_COLUMNS = ["row_type", "processes", "worker_index", "edges", "wall_seconds", "rate",
                   "span_rate", "sum_rate", "flush_seconds", "status", "verified"]
SCHEMAS = {"bench": BENCH_COLUMNS, "sweep": SWEEP_COLUMNS, "vertical": VERTICAL_COLUMNS,
           "cluster": CLUSTER_COLUMNS}


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _probs(text):
    try:
        values = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected four comma-separated numbers, got {text!r}")
    if len(values) != 4:
        raise argparse.ArgumentTypeError(f"expected four probabilities, got {len(values)}")
    return values


def _joined(values):
    return ";".join(str(v) for v in values)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(rows, columns, out):
    if out in (None, "-"):
        _emit(rows, columns, sys.stdout)
    else:
        with open(out, "w", newline="") as f:
            _emit(rows, columns, f)


def _emit(rows, columns, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])


# workload / schedule flags ------------------------------------------------------

def _add_workload_flags(p, required=True):
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--in", dest="input", metavar="PATH", help="edge file to replay")
    src.add_argument("--rmat", action="store_true", help="generate an R-MAT stream in memory")
    p.add_argument("--scale", type=int, default=bench.DESK_SCALE)
    p.add_argument("--edges", type=int, default=None,
                   help=f"edges to ingest (R-MAT default {bench.DESK_EDGES})")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--probs", type=_probs, default=GRAPH500_PROBS)
    p.add_argument("--batch", type=int, default=bench.DESK_BATCH)


def _add_schedule_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--cuts", type=_int_list, metavar="BASE,RATIO,KMIN,KMAX")
    g.add_argument("--cut-list", type=_int_list, metavar="C1,C2,...")


def _workload(args):
    if args.input:
        return args.input, args.edges
    params = RmatParams(args.scale, args.edges or bench.DESK_EDGES, args.probs, args.seed)
    return params, None


def _schedule(args):
    if getattr(args, "cut_list", None):
        return CutSchedule(tuple(args.cut_list))
    if getattr(args, "cuts", None):
        if len(args.cuts) != 4:
            raise UsageError("--cuts takes BASE,RATIO,KMIN,KMAX")
        return CutSchedule.from_ratio(*args.cuts)
    return bench.desk_schedule()


def _config(args, **overrides):
    workload, total = _workload(args)
    kwargs = dict(workload=workload, total_edges=total, batch_size=args.batch,
                  schedule=_schedule(args), mode=getattr(args, "mode", "hier"),
                  num_workers=getattr(args, "workers", 1), trial_count=args.trials,
                  warmup_batches=args.warmup, verify=args.verify)
    kwargs.update(overrides)
    return bench.BenchConfig(**kwargs)


# commands ---------------------------------------------------------------------------

def cmd_gen(args):
    params = RmatParams(args.scale, args.edges, args.probs, args.seed)
    triples = rmat_generate(params)
    if args.tsv:
        write_tsv(args.out, triples)
    else:
        write_edge_file(args.out, params, triples)
    return EXIT_OK


def _sample_row(sample, trial, verified):
    return {"mode": sample.mode, "workers": sample.workers, "batch": sample.batch_size,
            "cuts": _joined(sample.cuts), "trial": trial, "edges": sample.edges_ingested,
            "wall_seconds": sample.wall_seconds, "rate": sample.updates_per_second,
            "flush_seconds": sample.flush_seconds, "cascades": _joined(sample.cascade_counts),
            "verified": verified}


def cmd_bench(args):
    config = _config(args)
    result = bench.run_ingest(config)
    rows = [_sample_row(s, s.trial, None) for s in result.samples]
    median = _sample_row(result.median_sample, "median", result.verified)
    median["rate"] = result.median_rate
    rows.append(median)
    _write_csv(rows, BENCH_COLUMNS, args.out)
    return EXIT_VERIFY if result.verified is False else EXIT_OK


def cmd_sweep(args):
    workload, total = _workload(args)
    points = bench.run_sweep(args.bases, args.ratios, args.ncuts, workload,
                             batch_size=args.batch, kmin=args.kmin, trial_count=args.trials,
                             verify=args.verify, total_edges=total)
    rows = []
    failed = False
    for p in points:
        row = {"base": p.base, "ratio": p.ratio, "ncuts": p.ncuts, "error": p.error}
        if p.result is not None:
            s = p.result.median_sample
            row.update(cuts=_joined(s.cuts), edges=s.edges_ingested,
                       wall_seconds=s.wall_seconds, rate=p.result.median_rate,
                       flush_seconds=s.flush_seconds, cascades=_joined(s.cascade_counts),
                       verified=p.result.verified)
            failed |= p.result.verified is False
        rows.append(row)
    _write_csv(rows, SWEEP_COLUMNS, args.out)
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_scale(args):
    config = _config(args)
    results = bench.run_vertical(args.worker_counts, config)
    rows = []
    base_rate = results[0].median_rate
    for r in results:
        s = r.median_sample
        rows.append({"workers": s.workers, "edges": s.edges_ingested,
                     "wall_seconds": s.wall_seconds, "rate": r.median_rate,
                     "speedup": r.median_rate / base_rate, "flush_seconds": s.flush_seconds,
                     "cascades": _joined(s.cascade_counts), "verified": r.verified})
    _write_csv(rows, VERTICAL_COLUMNS, args.out)
    return EXIT_VERIFY if any(r.verified is False for r in results) else EXIT_OK


def cmd_cluster(args):
    config = _config(args, mode="hier", num_workers=1, trial_count=1)
    job_id = args.job_id or f"job-{uuid.uuid4().hex[:8]}"
    job = cluster.JobSpec(job_id, args.processes, config, Path(args.result_dir),
                          poll_interval=args.poll_interval, timeout=args.timeout,
                          verify=args.verify)
    handle = cluster.launch(job)
    try:
        report = cluster.collect(handle)
    finally:
        cluster.terminate(handle)
    rows = [{"row_type": "job", "processes": report.num_processes, "edges": report.total_edges,
             "wall_seconds": report.span_seconds, "rate": report.span_rate,
             "span_rate": report.span_rate, "sum_rate": report.sum_rate,
             "status": "ok" if report.ok else "incomplete" if not report.complete else "failed",
             "verified": report.verified}]
    for w in report.workers:
        rows.append({"row_type": "worker", "processes": report.num_processes,
                     "worker_index": w.worker_index, "edges": w.edges,
                     "wall_seconds": w.wall_seconds, "rate": w.rate,
                     "flush_seconds": w.flush_seconds, "status": w.status})
    _write_csv(rows, CLUSTER_COLUMNS, args.out)
    if report.verified is False or not report.ok:
        return EXIT_VERIFY
    return EXIT_OK


# report -----------------------------------------------------------------------------

FIGURES = {
    "sweep": [("fig2_top.dat", ["ratio", "rate", "ncuts", "base"]),
              ("fig2_bottom.dat", ["ncuts", "rate", "ratio", "base"])],
    "vertical": [("fig3.dat", ["workers", "rate", "speedup"])],
    "cluster": [("fig5.dat", ["processes", "span_rate", "sum_rate"])],
    "bench": [("bench.dat", ["workers", "rate", "mode"])],
}


def read_report_csvs(paths):
    """Read CSVs sharing one schema; returns ``(kind, rows)``."""
    kind = header = None
    rows = []
    for path in paths:
        with open(path, newline="") as f:
            reader = csv.reader(f)
            try:
                this = next(reader)
            except StopIteration:
                raise UsageError(f"{path}: empty file, no header row")
            if header is None:
                header = this
                kind = next((k for k, cols in SCHEMAS.items() if cols == this), None)
                if kind is None:
                    raise UsageError(f"{path}: unrecognized header {this}")
            elif this != header:
                offending = next((c for c in this if c not in header),
                                 next((c for c in header if c not in this), None))
                if offending is None:
                    offending = next(a for a, b in zip(this, header) if a != b)
                raise UsageError(f"{path}: schema mismatch at column {offending!r}")
            for rec in reader:
                rows.append(dict(zip(header, rec)))
    return kind, rows


def _num(text):
    try:
        return int(text)
    except ValueError:
        try:
            return float(text)
        except ValueError:
            return text


def cmd_report(args):
    kind, rows = read_report_csvs(args.csv)
    if kind == "cluster":
        rows = [r for r in rows if r["row_type"] == "job"]
    if kind == "bench":
        rows = [r for r in rows if r["trial"] == "median"]
    rows = [r for r in rows if r.get("rate", "") != "" or r.get("span_rate", "") != ""]
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, cols in FIGURES[kind]:
        data = sorted((tuple(_num(r[c]) for c in cols) for r in rows),
                      key=lambda t: tuple((0, x) if not isinstance(x, str) else (1, x)
                                          for x in t))
        with open(outdir / name, "w") as f:
            f.write("# " + " ".join(cols) + "\n")
            for t in data:
                f.write(" ".join(_fmt(x) for x in t) + "\n")
        written.append(outdir / name)
    for path in written:
        print(path)
    return EXIT_OK


# parser -----------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="hierhyper",
                                     description="Hierarchical hypersparse ingest benchmarks")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write an R-MAT edge file")
    p.add_argument("--scale", type=int, default=bench.DESK_SCALE)
    p.add_argument("--edges", type=int, default=bench.DESK_EDGES)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--probs", type=_probs, default=GRAPH500_PROBS)
    p.add_argument("--out", required=True)
    p.add_argument("--tsv", action="store_true", help="write row<TAB>col<TAB>val text instead")
    p.set_defaults(func=cmd_gen)

    def common(p, trials=3):
        _add_workload_flags(p)
        _add_schedule_flags(p)
        p.add_argument("--trials", type=int, default=trials)
        p.add_argument("--warmup", type=int, default=1, help="untimed warmup batches")
        p.add_argument("--verify", action="store_true",
                       help="check the result against an independent accumulation")
        p.add_argument("--out", default="-", help="CSV destination (default stdout)")

    p = sub.add_parser("bench", help="timed ingest of one configuration")
    common(p)
    p.add_argument("--mode", choices=["hier", "flat"], default="hier")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="cut schedule sweep")
    common(p, trials=1)
    p.add_argument("--bases", type=_int_list, default=[bench.DESK_BASE])
    p.add_argument("--ratios", type=_int_list, default=list(range(2, 9)))
    p.add_argument("--ncuts", type=_int_list, default=[7])
    p.add_argument("--kmin", type=int, default=bench.DESK_KMIN)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("scale", help="thread-sharded scaling within one process")
    common(p)
    p.add_argument("--worker-counts", type=_int_list, default=[1, 2, 4, 8])
    p.set_defaults(func=cmd_scale)

    p = sub.add_parser("cluster", help="multi-process sharded ingest")
    common(p, trials=1)
    p.add_argument("--processes", type=int, default=4)
    p.add_argument("--result-dir", required=True)
    p.add_argument("--job-id")
    p.add_argument("--poll-interval", type=float, default=100.0, help="milliseconds")
    p.add_argument("--timeout", type=float, default=300.0, help="seconds")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("report", help="turn result CSVs into plot data files")
    p.add_argument("csv", nargs="+")
    p.add_argument("--outdir", default=".")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("worker", help="internal: one cluster worker")
    p.add_argument("--worker-index", type=int, required=True)
    p.add_argument("--shard-start", type=int, required=True)
    p.add_argument("--shard-end", type=int, required=True)
    p.add_argument("--result-dir", required=True)
    p.add_argument("--config", required=True)
    p.set_defaults(func=lambda a: EXIT_OK if cluster.run_worker(
        a.worker_index, a.shard_start, a.shard_end, a.result_dir, a.config).ok else EXIT_VERIFY)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"hierhyper: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, ScheduleError, WorkloadError, ValueError) as exc:
        print(f"hierhyper: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"hierhyper: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
