import subprocess
import sys

import pytest

from ndlatency.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_compute_small_ta(capsys):
    code, out, _ = run(capsys, "compute", "--ta", "0.1", "--ts", "2.42", "--ds", "0.59", "--da", "0")
    assert code == 0
    assert "max=1.900000000" in out and "coupled=false" in out and "order=0" in out


def test_compute_coupled(capsys):
    code, out, _ = run(capsys, "compute", "--ta", "1", "--ts", "1", "--ds", "0.25", "--da", "0")
    assert code == 0
    assert "mean=INF max=INF coupled=true" in out


def test_compute_rejects_long_packet(capsys):
    code, _, err = run(capsys, "compute", "--ta", "0.1", "--ts", "2.42", "--ds", "0.05",
                       "--da", "0.06")
    assert code == 2 and "--da" in err


def test_misaligned_flag_is_named(capsys):
    code, _, err = run(capsys, "compute", "--ta", "0.1000005", "--ts", "2.42", "--ds", "0.59")
    assert code == 2 and "--ta" in err


def test_coarse_tick_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("ND_TICK", "0.01")
    code, out, _ = run(capsys, "compute", "--ta", "0.1", "--ts", "2.42", "--ds", "0.59")
    assert code == 0 and "max=1.900000000" in out
    code, _, err = run(capsys, "compute", "--ta", "0.105", "--ts", "2.42", "--ds", "0.59")
    assert code == 2 and "--ta" in err


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["compute", "--ta", "1"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
    code, _, _ = run(capsys, "sweep", "--ts", "1", "--ds", "0.1", "--ta-range", "1:2")
    assert code == 1


def test_numerical_guard_exit_code(capsys):
    code, _, err = run(capsys, "simulate", "--ta", "0.001", "--ts", "10.000001", "--ds", "0.001",
                       "--exhaustive", "--horizon", "1")
    assert code == 3 and "guard" in err


def test_trace_lines(capsys):
    code, out, _ = run(capsys, "compute", "--ta", "0.0026", "--ts", "0.002", "--ds", "0.0003",
                       "--trace")
    lines = out.splitlines()
    assert lines[0].split("\t") == ["n", "gamma", "mode", "sigma", "mass", "partial_mean"]
    assert lines[1].split("\t")[:4] == ["0", "600", "g", "2600"]


def test_sweep_csv(capsys, tmp_path):
    path = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sweep", "--ts", "1", "--ds", "0.1", "--ta-range", "0.9:1.1:0.1",
                     "--out", str(path))
    lines = path.read_text().splitlines()
    assert code == 0 and lines[0] == "Ta,Ts,ds,da,mean,max,order,duty_cycle_adv,objective"
    assert len(lines) == 4 and ",INF," in lines[2]


def test_simulate_is_deterministic(capsys, tmp_path):
    argv = ["simulate", "--ta", "0.026", "--ts", "0.02", "--ds", "0.003", "--runs", "200",
            "--seed", "7", "--rows", str(tmp_path / "rows.csv")]
    first = run(capsys, *argv)
    rows = (tmp_path / "rows.csv").read_bytes()
    second = run(capsys, *argv)
    assert first == second and rows == (tmp_path / "rows.csv").read_bytes()
    assert rows.decode().splitlines()[0] == "offset_ticks,latency_ticks,aborted"
    assert len(rows.decode().splitlines()) == 201


def test_simulate_exhaustive_matches_compute(capsys):
    _, out_sim, _ = run(capsys, "simulate", "--ta", "0.026", "--ts", "0.02", "--ds", "0.003",
                        "--exhaustive")
    _, out_cmp, _ = run(capsys, "compute", "--ta", "0.026", "--ts", "0.02", "--ds", "0.003")
    mean = out_cmp.split()[0]
    assert out_sim.startswith(mean) and "aborted=0" in out_sim


def test_compare_round_trip(capsys, tmp_path):
    path = tmp_path / "model.csv"
    base = ["--ts", "0.256", "--ds", "0.032", "--da", "0.000248"]
    run(capsys, "sweep", *base, "--ta-range", "0.01:0.4:0.01", "--out", str(path))
    common = ["--runs", "300", "--seed", "3", "--horizon", "100"]
    code_a, out_a, _ = run(capsys, "compare", *base, "--ta-range", "0.01:0.4:0.01", *common)
    code_b, out_b, _ = run(capsys, "compare", "--model-csv", str(path), *common)
    assert code_a == code_b == 0
    assert out_a == out_b
    assert out_a.startswith("mean: rmse=")


def test_compare_needs_a_source(capsys):
    code, _, _ = run(capsys, "compare", "--runs", "10")
    assert code == 1


def test_explore(capsys, tmp_path):
    path = tmp_path / "grid.csv"
    code, _, err = run(capsys, "explore", "--ds", "0.01", "--da", "0.000248",
                       "--ta-range", "0.02:0.1:0.00125", "--ts-range", "0.05:0.2:0.05",
                       "--objective", "energy_joint", "--basis", "max", "--out", str(path))
    assert code == 0 and err.startswith("best Ta=")
    assert len(path.read_text().splitlines()) == 1 + 4 * 65


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ndlatency", "compute", "--ta", "1", "--ts", "1",
                           "--ds", "0.25"], capture_output=True, text=True)
    assert proc.returncode == 0 and "coupled=true" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "ndlatency", "compute", "--ta", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 1
