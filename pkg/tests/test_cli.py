import csv
import io
import subprocess
import sys

import pytest

from hierhyper.cli import (BENCH_COLUMNS, CLUSTER_COLUMNS, SWEEP_COLUMNS, VERTICAL_COLUMNS,
                           main)
from hierhyper.streamgen import HEADER_SIZE, read_edge_file

RMAT = ["--rmat", "--scale", "14", "--edges", "100000", "--batch", "10000"]


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def parse(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], [dict(zip(rows[0], r)) for r in rows[1:]]


def test_gen_is_deterministic(tmp_path):
    a, b = tmp_path / "a.bin", tmp_path / "b.bin"
    for p in (a, b):
        assert main(["gen", "--scale", "10", "--edges", "1000", "--seed", "7", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    header, _ = read_edge_file(a)
    assert header.num_edges == 1000 and header.scale == 10


def test_gen_zero_edges(tmp_path):
    p = tmp_path / "z.bin"
    assert main(["gen", "--edges", "0", "--scale", "5", "--out", str(p)]) == 0
    assert p.stat().st_size == HEADER_SIZE


def test_gen_rejects_bad_probs(tmp_path, capsys):
    code = main(["gen", "--probs", "0.5,0.5,0.5,0.5", "--out", str(tmp_path / "x.bin")])
    assert code == 2
    assert "sum to 1" in capsys.readouterr().err


def test_gen_tsv(tmp_path):
    p = tmp_path / "x.tsv"
    assert main(["gen", "--scale", "4", "--edges", "3", "--out", str(p), "--tsv"]) == 0
    lines = p.read_text().splitlines()
    assert len(lines) == 3 and all(len(l.split("\t")) == 3 for l in lines)


def test_bench_verify_and_modes(capsys):
    code, out = run(["bench", *RMAT, "--mode", "hier", "--verify", "--trials", "2"], capsys)
    assert code == 0
    header, rows = parse(out)
    assert header == BENCH_COLUMNS
    assert [r["trial"] for r in rows] == ["0", "1", "median"]
    assert rows[-1]["verified"] == "1"
    code, flat = run(["bench", *RMAT, "--mode", "flat", "--trials", "1"], capsys)
    assert code == 0
    assert {r["edges"] for r in parse(flat)[1]} == {r["edges"] for r in rows} == {"100000"}


def test_bench_from_file_and_cut_list(tmp_path, capsys):
    p = tmp_path / "e.bin"
    main(["gen", "--scale", "12", "--edges", "30000", "--out", str(p)])
    code, out = run(["bench", "--in", str(p), "--batch", "5000", "--cut-list", "100,1000",
                     "--trials", "1", "--verify"], capsys)
    assert code == 0
    _, rows = parse(out)
    assert rows[0]["cuts"] == "100;1000"


def test_bench_missing_workload_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["bench"])
    assert info.value.code == 2


def test_bench_bad_schedule_is_usage_error(capsys):
    assert main(["bench", *RMAT, "--cut-list", "10,5"]) == 2
    assert main(["bench", *RMAT, "--cuts", "1,2,3"]) == 2


def test_bench_missing_file_is_io_error(tmp_path, capsys):
    assert main(["bench", "--in", str(tmp_path / "nope.bin")]) == 3


def test_bench_corrupt_file_is_io_error(tmp_path, capsys):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"garbage" * 10)
    assert main(["bench", "--in", str(p)]) == 3


def test_sweep_emits_one_row_per_ratio(capsys):
    code, out = run(["sweep", *RMAT, "--bases", "256", "--ncuts", "3", "--verify"], capsys)
    assert code == 0
    header, rows = parse(out)
    assert header == SWEEP_COLUMNS
    assert [r["ratio"] for r in rows] == [str(r) for r in range(2, 9)]
    assert all(r["verified"] == "1" for r in rows)


@pytest.mark.filterwarnings("ignore:.*available CPUs:RuntimeWarning")
def test_scale_rows(capsys):
    code, out = run(["scale", *RMAT, "--worker-counts", "1,2,4,8", "--trials", "1",
                     "--verify"], capsys)
    assert code == 0
    header, rows = parse(out)
    assert header == VERTICAL_COLUMNS
    assert [r["workers"] for r in rows] == ["1", "2", "4", "8"]
    assert {r["edges"] for r in rows} == {"100000"}
    assert float(rows[0]["speedup"]) == 1.0


def test_cluster_rows(tmp_path, capsys):
    code, out = run(["cluster", *RMAT, "--processes", "4", "--result-dir",
                     str(tmp_path / "r"), "--job-id", "t", "--poll-interval", "20",
                     "--verify"], capsys)
    assert code == 0
    header, rows = parse(out)
    assert header == CLUSTER_COLUMNS
    assert [r["row_type"] for r in rows] == ["job"] + ["worker"] * 4
    assert rows[0]["verified"] == "1" and rows[0]["status"] == "ok"
    assert sum(int(r["edges"]) for r in rows[1:]) == int(rows[0]["edges"]) == 100_000


def test_report_sweep(tmp_path, capsys):
    csv_a = tmp_path / "a.csv"
    csv_b = tmp_path / "b.csv"
    main(["sweep", *RMAT, "--bases", "256", "--ratios", "5,3", "--ncuts", "2", "--out", str(csv_a)])
    main(["sweep", *RMAT, "--bases", "256", "--ratios", "4", "--ncuts", "2", "--out", str(csv_b)])
    outdir = tmp_path / "plots"
    assert main(["report", str(csv_a), str(csv_b), "--outdir", str(outdir)]) == 0
    lines = (outdir / "fig2_top.dat").read_text().splitlines()
    assert lines[0] == "# ratio rate ncuts base"
    assert [l.split()[0] for l in lines[1:]] == ["3", "4", "5"]
    assert (outdir / "fig2_bottom.dat").exists()


def test_report_schema_mismatch(tmp_path, capsys):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    a.write_text(",".join(SWEEP_COLUMNS) + "\n")
    b.write_text(",".join(SWEEP_COLUMNS[:-1] + ["oops"]) + "\n")
    assert main(["report", str(a), str(b), "--outdir", str(tmp_path)]) == 2
    assert "'oops'" in capsys.readouterr().err


def test_report_vertical_and_cluster(tmp_path, capsys):
    v = tmp_path / "v.csv"
    v.write_text(",".join(VERTICAL_COLUMNS) + "\n2,10,1.0,20.0,2.0,0.1,,\n1,10,1.0,10.0,1.0,0.1,,\n")
    assert main(["report", str(v), "--outdir", str(tmp_path)]) == 0
    assert (tmp_path / "fig3.dat").read_text().splitlines()[1:] == ["1 10.0 1.0", "2 20.0 2.0"]
    c = tmp_path / "c.csv"
    c.write_text(",".join(CLUSTER_COLUMNS) + "\njob,4,,100,1.0,100.0,100.0,150.0,,ok,1\n"
                 "worker,4,0,25,1.0,25.0,,,0.1,ok,\n")
    assert main(["report", str(c), "--outdir", str(tmp_path)]) == 0
    assert (tmp_path / "fig5.dat").read_text().splitlines()[1:] == ["4 100.0 150.0"]


def test_csv_round_trip(tmp_path, capsys):
    from hierhyper.cli import read_report_csvs
    p = tmp_path / "b.csv"
    assert main(["bench", *RMAT, "--trials", "1", "--out", str(p)]) == 0
    kind, rows = read_report_csvs([p])
    assert kind == "bench"
    rate = float(rows[-1]["rate"])
    assert repr(rate) == rows[-1]["rate"]


def test_module_entry_point(tmp_path):
    p = tmp_path / "m.bin"
    proc = subprocess.run([sys.executable, "-m", "hierhyper", "gen", "--scale", "3", "--edges",
                           "5", "--out", str(p)], capture_output=True)
    assert proc.returncode == 0
    assert p.stat().st_size == HEADER_SIZE + 5 * 24
