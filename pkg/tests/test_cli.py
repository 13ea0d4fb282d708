import os
import subprocess
import sys

import pytest

from aivip.cli import main
from aivip.data import Dataset
from aivip.graph import parse_graph, read_graph

IV_DAG = "nodes: S W Y U\nS --> W\nW --> Y\nU --> W\nU --> Y\n"


def _run(*args, env=None):
    full = dict(os.environ, **(env or {}))
    return subprocess.run([sys.executable, "-m", "aivip.cli", *args], capture_output=True, text=True, env=full)


@pytest.fixture
def iv_file(tmp_path):
    p = tmp_path / "iv.txt"
    p.write_text(IV_DAG)
    return p


@pytest.fixture
def data_file(tmp_path):
    p = tmp_path / "d.csv"
    assert main(["simulate", "--group", "I", "--n", "3000", "--seed", "7", "--noise-covariates", "2", "--out", str(p)]) == 0
    return p


def test_simulate_rows(tmp_path):
    p = tmp_path / "d.csv"
    assert main(["simulate", "--group", "I", "--n", "1000", "--seed", "7", "--out", str(p)]) == 0
    d = Dataset.from_csv(p)
    assert d.n == 1000 and len(d.columns) == 26


def test_simulate_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        main(["simulate", "--n", "200", "--seed", "3", "--out", str(p)])
    assert a.read_bytes() == b.read_bytes()


def test_estimate_aivip(data_file, capsys):
    assert main(["estimate", "--data", str(data_file), "--method", "aivip", "--treatment", "W", "--outcome", "Y",
                 "--iv", "S", "--alpha", "0.05"]) == 0
    out = capsys.readouterr().out
    keys = [line.split("=")[0] for line in out.splitlines()]
    assert keys[:4] == ["method", "beta_hat", "z", "sigma_sw"]
    assert "pag_edges" in keys


def test_estimate_wald_and_explicit_z(data_file, capsys):
    main(["estimate", "--data", str(data_file), "--method", "wald", "--treatment", "W", "--outcome", "Y", "--iv", "S"])
    out = capsys.readouterr().out
    assert "sigma_sy=" in out and "method=wald" in out
    main(["estimate", "--data", str(data_file), "--z", "X3", "--treatment", "W", "--outcome", "Y", "--iv", "S",
          "--precision", "3"])
    lines = dict(line.split("=", 1) for line in capsys.readouterr().out.splitlines())
    assert lines["z"] == "X3"
    assert len(lines["beta_hat"].replace("-", "").replace(".", "").lstrip("0")) <= 3


def test_estimate_without_data_is_usage_error():
    r = _run("estimate", "--treatment", "W", "--outcome", "Y", "--iv", "S")
    assert r.returncode == 2
    assert "usage" in r.stderr


def test_estimate_bad_role_is_domain_error(data_file):
    r = _run("estimate", "--data", str(data_file), "--method", "tsls", "--treatment", "W", "--outcome", "Y", "--iv", "Q")
    assert r.returncode == 1
    assert "unknown column" in r.stderr


def test_missing_file_is_domain_error(tmp_path):
    assert main(["learn", "--data", str(tmp_path / "nope.csv")]) == 1


def test_unknown_benchmark_method_is_usage_error():
    assert main(["benchmark", "--groups", "I", "--sizes", "500", "--methods", "sisvive", "--reps", "1"]) == 2


def test_learn_round_trip(data_file, tmp_path):
    out = tmp_path / "pag.txt"
    assert main(["learn", "--data", str(data_file), "--out", str(out)]) == 0
    g = read_graph(out)
    assert set(g.nodes) == set(Dataset.from_csv(data_file).columns)


def test_project_and_discover(iv_file, tmp_path, capsys):
    mag = tmp_path / "mag.txt"
    assert main(["project", "--graph", str(iv_file), "--latent", "U", "--out", str(mag)]) == 0
    assert read_graph(mag) == parse_graph("nodes: S W Y\nS --> W\nS --> Y\nW --> Y\n")
    assert main(["discover", "--graph", str(mag), "--treatment", "W", "--outcome", "Y", "--iv", "S"]) == 0
    assert capsys.readouterr().out == "\n"


def test_discover_visible_edge(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("nodes: K W Y S\nK --> W\nW --> Y\nS --> W\n")
    r = _run("discover", "--graph", str(p), "--treatment", "W", "--outcome", "Y", "--iv", "S")
    assert r.returncode == 1 and "visible" in r.stderr


def test_msep(iv_file, capsys):
    assert main(["msep", "--graph", str(iv_file), "--x", "S", "--y", "Y", "--z", "W"]) == 0
    assert capsys.readouterr().out == "CONNECTED S --> W <-- U --> Y\n"
    main(["msep", "--graph", str(iv_file), "--x", "S", "--y", "U"])
    assert capsys.readouterr().out == "SEPARATED\n"


def test_benchmark_output(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["benchmark", "--groups", "I", "--sizes", "500", "--methods", "tsls", "--reps", "2",
                 "--noise-covariates", "0", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "group,n,method,mean_bias_pct,reps" and len(lines) == 2


def test_benchmark_independent_of_jobs_and_threads(tmp_path):
    args = ["benchmark", "--groups", "I", "--sizes", "1000", "--methods", "aivip,tsls", "--reps", "3",
            "--noise-covariates", "3"]
    outs = []
    for jobs, threads in (("1", "1"), ("3", "4")):
        r = _run(*args, "--jobs", jobs, env={"OMP_NUM_THREADS": threads, "OPENBLAS_NUM_THREADS": threads})
        assert r.returncode == 0, r.stderr
        outs.append(r.stdout)
    assert outs[0] == outs[1]
