"""Time the compiled kernels against their pure-Python fallbacks.

    python3 benchmarks/bench_kernels.py --nodes 30 --queries 200

Both backends get identical inputs; results are checked for agreement
before timings are reported.
"""

import argparse
import sys
import time

import numpy as np

from aivip import _core_py
from aivip.graph import MixedGraph, directed

try:
    from aivip import _core
except ImportError:
    _core = None


def random_dag_marks(n, p, rng):
    order = rng.permutation(n)
    names = [f"V{i}" for i in range(n)]
    pairs = [(names[order[i]], names[order[j]]) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return MixedGraph(names, directed(*pairs)).matrix


def random_corr(k, n_obs, rng):
    x = rng.normal(size=(n_obs, k)) @ rng.normal(size=(k, k))
    return np.corrcoef(x, rowvar=False)


def workload(args, rng):
    marks = random_dag_marks(args.nodes, args.density, rng)
    n = args.nodes
    msep = []
    for _ in range(args.queries):
        x, y = rng.choice(n, 2, replace=False)
        z = np.zeros(n, dtype=np.uint8)
        z[rng.choice(n, rng.integers(0, n // 3 + 1), replace=False)] = 1
        z[x] = z[y] = 0
        msep.append((int(x), int(y), z))
    corr = random_corr(args.nodes, 5 * args.nodes, rng)
    pcor = []
    for _ in range(args.queries):
        size = int(rng.integers(2, min(n, 8) + 1))
        pcor.append(rng.choice(n, size, replace=False).astype(np.intp))
    return marks, msep, corr, pcor


def run(mod, marks, msep, corr, pcor):
    seeds = np.zeros(marks.shape[0], dtype=np.uint8)
    seeds[0] = 1
    out = {}
    t = time.perf_counter()
    res_m = [bool(mod.m_connected(marks, x, y, z)) for x, y, z in msep]
    out["m_connected"] = (time.perf_counter() - t, res_m)
    t = time.perf_counter()
    res_a = [mod.ancestor_mask(marks, z).tolist() for _, _, z in msep]
    out["ancestor_mask"] = (time.perf_counter() - t, res_a)
    t = time.perf_counter()
    res_p = [mod.partial_corr(corr, idx) for idx in pcor]
    out["partial_corr"] = (time.perf_counter() - t, res_p)
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=30)
    ap.add_argument("--density", type=float, default=0.15)
    ap.add_argument("--queries", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _core is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1
    rng = np.random.default_rng(args.seed)
    data = workload(args, rng)
    py = run(_core_py, *data)
    cy = run(_core, *data)
    print(f"{'kernel':<16}{'python_s':>12}{'cython_s':>12}{'speedup':>10}")
    for name in py:
        tp, rp = py[name]
        tc, rc = cy[name]
        if name == "partial_corr":
            same = np.allclose(rp, rc, rtol=1e-10, atol=1e-12, equal_nan=True)
        else:
            same = rp == rc
        if not same:
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        print(f"{name:<16}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
