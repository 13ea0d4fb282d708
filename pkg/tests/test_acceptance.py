"""Acceptance criteria 1-9.

Each test prints one ``PASS``/``FAIL`` line with the measured quantity, then
asserts. Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import itertools
import os
import subprocess
import sys

import numpy as np
import pytest

from aivip.ancestral_iv import conditioning_set_pag
from aivip.ci import DSepOracle, FisherZ
from aivip.data import Dataset
from aivip.estimator import bias, tsls, two_stage, wald_estimate
from aivip.graph import GraphKind, MixedGraph, check_kind, directed, format_graph
from aivip.learner import LearnerConfig, learn_pag
from aivip.projection import dag_to_mag, is_visible, pag_oracle
from aivip.separation import d_separated, m_separated, m_separated_bruteforce
from aivip.simulation import BETA_TRUE, ROLES, SimSpec, generate, run_benchmark, true_dag

from helpers import random_ancestral, random_latent_dag

pytestmark = pytest.mark.slow


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail
    return emit


def test_c1_separation_oracle_equivalence(report):
    rng = np.random.default_rng(1)
    graphs = queries = mismatches = 0
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        g = random_ancestral(rng, n, rng.uniform(0.1, 0.5))
        graphs += 1
        for _ in range(10):
            x, y = rng.choice(n, 2, replace=False)
            rest = [v for i, v in enumerate(g.nodes) if i not in (x, y)]
            z = [v for v in rest if rng.random() < 0.3]
            a, b = g.nodes[x], g.nodes[y]
            queries += 1
            mismatches += m_separated(g, a, b, z).separated != m_separated_bruteforce(g, a, b, z).separated
    report(1, mismatches == 0, f"{graphs} graphs, {queries} queries, {mismatches} disagreements")


def test_c2_projection_soundness(report):
    rng = np.random.default_rng(2)
    dags = bad_model = bad_mag = 0
    while dags < 200:
        spec = random_latent_dag(rng, max_observed=5, max_latent=2)
        dags += 1
        mag = dag_to_mag(spec)
        bad_mag += not check_kind(mag, GraphKind.MAG)
        obs = spec.observed
        for x, y in itertools.combinations(obs, 2):
            rest = [v for v in obs if v not in (x, y)]
            for r in range(len(rest) + 1):
                for z in itertools.combinations(rest, r):
                    bad_model += d_separated(spec.dag, x, y, z).separated != m_separated(mag, x, y, z).separated
    report(2, bad_model == 0 and bad_mag == 0,
           f"{dags} latent DAGs, {bad_model} independence mismatches, {bad_mag} invalid MAGs")


def test_c3_confounded_iv_projection(report, iv_dag):
    mag = dag_to_mag(iv_dag, ["U"])
    want = MixedGraph(["S", "W", "Y"], directed(("S", "W"), ("S", "Y"), ("W", "Y")))
    ok = mag == want and not is_visible(mag, "W", "Y")
    edges = "; ".join(format_graph(mag).splitlines()[1:])
    report(3, ok, f"projected edges {edges}; W->Y visible={is_visible(mag, 'W', 'Y')}")


def test_c4_oracle_path(report):
    zs, means = {}, {}
    for group in ("I", "II"):
        spec = true_dag(group)
        pag = learn_pag(DSepOracle(spec.dag, spec.observed))
        zs[group] = conditioning_set_pag(pag, ROLES)
        betas = [two_stage(generate(SimSpec(group, 10000, seed=s)), ROLES, zs[group]).beta_hat for s in range(20)]
        means[group] = float(np.mean(betas))
    ok = all(z == ("X3",) for z in zs.values()) and all(abs(m - BETA_TRUE) <= 0.3 for m in means.values())
    report(4, ok, f"Z={zs}, mean beta_hat={ {g: round(m, 4) for g, m in means.items()} } (tolerance 0.3)")


def test_c5_benchmark_group1(report):
    rep = run_benchmark(["I"], [10000], ["aivip", "tsls", "tslsciv"], 20, seed=0)
    a, t, c = (rep.cell("I", 10000, m) for m in ("aivip", "tsls", "tslsciv"))
    ok = (a.mean_bias_pct <= 35 and t.mean_bias_pct >= 100 and c.mean_bias_pct >= 100
          and a.mean_bias_pct < t.mean_bias_pct <= c.mean_bias_pct * 1.1)
    report(5, ok, f"bias % AIViP={a.mean_bias_pct:.1f} ({a.failed} failed reps), TSLS={t.mean_bias_pct:.1f}, "
                  f"TSLSCIV={c.mean_bias_pct:.1f}")


def test_c6_learner_oracle_exactness(report):
    rng = np.random.default_rng(6)
    cfg = LearnerConfig(use_possible_dsep=True)
    total = mismatches = 0
    for _ in range(100):
        spec = random_latent_dag(rng, max_observed=5, max_latent=2)
        total += 1
        mismatches += learn_pag(DSepOracle(spec.dag, spec.observed), cfg) != pag_oracle(dag_to_mag(spec))
    report(6, mismatches == 0, f"{total} latent DAGs, {mismatches} PAG mismatches")


def test_c7_estimator_identities(report):
    rng = np.random.default_rng(7)
    d = generate(SimSpec("I", 5000, seed=int(rng.integers(2**31))))
    gap = abs(two_stage(d, ROLES).beta_hat - wald_estimate(d, ROLES).beta_hat)
    vals = d.values.copy()
    vals[:, d.index("Y")] *= 3.7
    d2 = Dataset(d.columns, vals)
    scale = max(abs(f(d2).beta_hat - 3.7 * f(d).beta_hat)
                for f in (lambda x: wald_estimate(x, ROLES), lambda x: tsls(x, ROLES),
                          lambda x: two_stage(x, ROLES, ["X3"])))
    b = bias(3, 2)
    ok = gap <= 1e-8 and b == 50.0 and scale <= 1e-8
    report(7, ok, f"|two_stage-wald|={gap:.2e}, bias(3,2)={b}, rescaling error={scale:.2e}")


def test_c8_fisher_z_calibration(report):
    rng = np.random.default_rng(8)
    alpha, reps = 0.05, 1000
    rejections = 0
    for _ in range(reps):
        d = Dataset(["I", "J"], rng.normal(size=(10000, 2)))
        rejections += not FisherZ(d, alpha)("I", "J").independent
    rate = rejections / reps
    report(8, abs(rate - alpha) <= 0.02, f"type-I error {rate:.3f} over {reps} null replications (target 0.05 +- 0.02)")


def _cli(args, threads):
    env = dict(os.environ, OMP_NUM_THREADS=threads, OPENBLAS_NUM_THREADS=threads, MKL_NUM_THREADS=threads)
    r = subprocess.run([sys.executable, "-m", "aivip.cli", *args], capture_output=True, env=env)
    return r.returncode, r.stdout


def test_c9_cli_determinism(report, tmp_path):
    data = tmp_path / "d.csv"
    _cli(["simulate", "--group", "I", "--n", "3000", "--seed", "4", "--out", str(data)], "1")
    runs = {
        "simulate": lambda out: ["simulate", "--group", "II", "--n", "2000", "--seed", "5", "--out", out],
        "learn": lambda out: ["learn", "--data", str(data), "--out", out],
        "estimate": lambda out: ["estimate", "--data", str(data), "--treatment", "W", "--outcome", "Y", "--iv", "S"],
        "benchmark": lambda out: ["benchmark", "--groups", "I,II", "--sizes", "1000", "--reps", "3",
                                  "--methods", "aivip,tsls,tslsciv", "--out", out],
    }
    differing = []
    for name, build in runs.items():
        outputs = []
        for k, (threads, jobs) in enumerate((("1", "1"), ("4", "3"))):
            out = tmp_path / f"{name}{k}.out"
            args = build(str(out)) + (["--jobs", jobs] if name == "benchmark" else [])
            code, stdout = _cli(args, threads)
            outputs.append((code, stdout, out.read_bytes() if out.exists() else b""))
        if outputs[0] != outputs[1] or outputs[0][0] != 0:
            differing.append(name)
    report(9, not differing, f"byte-identical across thread/job counts: {sorted(runs)}; differing: {differing}")
