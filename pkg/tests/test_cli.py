import csv
import json
import subprocess
import sys

import pytest

from dualavg.cli import CSV_HEADER, main


def read_rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_quad_gda_last_iterate_solves(capsys):
    code = main(["run", "--algo", "gda", "--problem", "quad:3", "--iters", "10",
                 "--gda-output", "last"])
    assert code == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) - 1 <= 10
    assert abs(float(rows[-1][5])) <= 1e-12


def test_quad_gda_averaged_default(capsys):
    main(["run", "--algo", "gda", "--problem", "quad:3", "--iters", "10"])
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    gaps = [float(r[5]) for r in rows[1:]]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_missing_dataset_exit_2(capsys, tmp_path):
    missing = tmp_path / "nope.svm"
    code = main(["run", "--algo", "scpda", "--problem", f"libsvm:{missing}", "--iters", "5"])
    assert code == 2
    assert str(missing) in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["run", "--algo", "scpda", "--problem", "synth-svm:10,2", "--iters", "5"],
    ["run", "--algo", "scpda", "--problem", "quad:2", "--iters", "0"],
    ["run", "--algo", "scpda", "--problem", "quad:2", "--iters", "5", "--mu", "-1"],
    ["run", "--algo", "scpda", "--problem", "quad:2", "--iters", "5", "--stochastic"],
    ["run", "--algo", "scpda", "--problem", "quad:2", "--iters", "5", "--set", "ball:0"],
    ["run", "--algo", "scpda", "--problem", "quad:2", "--iters", "5", "--init", "1,2,3"],
    ["verify", "nonsense"],
    [],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["run", "--algo", "newton", "--problem", "quad:2", "--iters", "3"])
    assert info.value.code == 2


def test_run_to_directory_is_reproducible(tmp_path):
    args = ["run", "--algo", "scpda", "--problem", "synth-svm:50,4,1", "--iters", "300",
            "--stochastic", "--seed", "3", "--no-timing"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    name = "scpda_linear_seed3.csv"
    assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_libsvm_problem(tmp_path, capsys):
    data = tmp_path / "tiny.svm"
    data.write_text("1 1:1 2:0.5\n0 2:-1\n1 1:0.2\n0 1:-0.3 2:-0.1\n")
    code = main(["run", "--algo", "pegasos", "--problem", f"libsvm:{data}", "--iters", "20",
                 "--dim", "3", "--subsample", "3"])
    assert code == 0
    assert len(capsys.readouterr().out.splitlines()) == 21


def test_bench_summary(tmp_path):
    out = tmp_path / "bench"
    code = main(["bench", "--algos", "scpda,pegasos", "--problem", "synth-svm:60,5,0",
                 "--iters", "500", "--stochastic", "--seeds", "0-4", "--out", str(out)])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary["algorithms"]) == {"scpda", "pegasos"}
    for entry in summary["algorithms"].values():
        assert entry["seeds"] == [0, 1, 2, 3, 4] and not entry["failed"]
        assert entry["min_final_gap"] <= entry["median_final_gap"] <= entry["max_final_gap"]
    rows = read_rows(out / "bench.csv")
    assert tuple(rows[0]) == CSV_HEADER and len({r[3] for r in rows[1:]}) == 5
    assert len(list((out / "traces").glob("*.csv"))) == 10


def test_bench_single_cell_and_deterministic_seeds(tmp_path):
    out = tmp_path / "b"
    assert main(["bench", "--algos", "gda", "--problem", "synth-svm:40,3,0", "--iters", "50",
                 "--seeds", "0,1,2", "--out", str(out)]) == 0
    entry = json.loads((out / "summary.json").read_text())["algorithms"]["gda"]
    assert entry["std_final_gap"] == 0.0 and entry["slope"] == [None] * 3
    out1 = tmp_path / "c"
    assert main(["bench", "--algos", "gda", "--problem", "quad:2", "--iters", "5",
                 "--seeds", "7", "--out", str(out1)]) == 0
    assert json.loads((out1 / "summary.json").read_text())["algorithms"]["gda"]["seeds"] == [7]


def test_bench_failed_cell_exit_1(tmp_path):
    code = main(["bench", "--algos", "gda", "--problem", "quad:2", "--iters", "5",
                 "--seeds", "0", "--init", "1,2", "--out", str(tmp_path / "x")])
    assert code == 0
    code = main(["bench", "--algos", "gda", "--problem", "quad:2", "--iters", "5",
                 "--seeds", "0", "--init", str(tmp_path / "absent.npy"),
                 "--out", str(tmp_path / "y")])
    assert code == 1
    summary = json.loads((tmp_path / "y" / "summary.json").read_text())
    assert summary["algorithms"]["gda"]["failed"]


def test_reference_command(capsys):
    assert main(["reference", "--problem", "quad:2", "--mu", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["f_star"] == 0.0 and out["certified"]


def test_verify_selector_runs_one_suite(capsys):
    assert main(["--verify", "lemma3"]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if l.startswith(("PASS", "FAIL"))]
    assert lines and all("lemma3" in l for l in lines)


def test_verify_fault_injection_fails(capsys):
    assert main(["verify", "theorem1", "--inject-fault", "gda_sign"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dualavg", "verify", "replay"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "checks passed" in proc.stdout
