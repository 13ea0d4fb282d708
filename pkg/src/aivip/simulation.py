"""Synthetic benchmark: two latent-confounded SEMs and a bias-matrix runner.

Group I has S -> W directly; in Group II S and W share a latent cause U3.
Both have true effect 2 of W on Y, a latent W-Y confounder U, a collider X1
(S -> X1 <- X2, with X1 <-> Y through U1) and a valid conditioning set {X3}
(S <- U2 -> X3 -> Y).

Noise covariates X4.. are disconnected from the core. By default they form
a Gaussian AR(1) chain; ``noise_structure="exchangeable"`` gives equal
pairwise correlation through a latent factor ``F``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ancestral_iv import IvRoles
from .data import Dataset
from .estimator import EstimationError, aivip, bias, tsls, tslsciv, two_stage
from .graph import GraphError, MixedGraph, directed
from .learner import LearnerConfig
from .projection import ProjectionSpec

GROUPS = ("I", "II")
VARIANTS = ("consistent", "paper_literal")
NOISE_STRUCTURES = ("chain", "exchangeable")
METHODS = ("aivip", "tsls", "tslsciv", "oracle_z")
BETA_TRUE = 2.0
NOISE_SD = 0.5
ROLES = IvRoles(w="W", y="Y", s="S")
ORACLE_Z = ("X3",)


@dataclass(frozen=True)
class SimSpec:
    group: str = "I"
    n: int = 10000
    seed: int = 0
    variant: str = "consistent"
    noise_covariates: int = 20
    noise_structure: str = "chain"
    noise_corr: float = 0.2

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ValueError(f"group must be one of {GROUPS}, got {self.group!r}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.noise_structure not in NOISE_STRUCTURES:
            raise ValueError(f"noise_structure must be one of {NOISE_STRUCTURES}")
        if self.n < 100:
            raise ValueError(f"n must be at least 100, got {self.n}")
        if self.noise_covariates < 0:
            raise ValueError("noise_covariates must be non-negative")
        if not 0.0 <= self.noise_corr < 1.0:
            raise ValueError("noise_corr must lie in [0, 1)")


def _noise_names(k: int) -> list[str]:
    return [f"X{i}" for i in range(4, 4 + k)]


def observed_columns(noise_covariates: int = 20) -> tuple[str, ...]:
    return ("S", "X1", "X2", "X3", *_noise_names(noise_covariates), "W", "Y")


def true_dag(group: str, variant: str = "consistent", noise_covariates: int = 20, noise_structure: str = "chain") -> ProjectionSpec:
    """Generating DAG with its observed/latent split."""
    SimSpec(group=group, variant=variant, noise_covariates=noise_covariates, noise_structure=noise_structure)
    noise = _noise_names(noise_covariates)
    latent = ["U", "U1", "U2"] + (["U3"] if group == "II" else [])
    pairs = [("U2", "S"), ("U2", "X3"), ("S", "X1"), ("X2", "X1"), ("U1", "X1"),
             ("U1", "Y"), ("X3", "Y"), ("U", "W"), ("U", "Y"), ("W", "Y")]
    pairs += [("S", "W")] if group == "I" else [("U3", "S"), ("U3", "W")]
    if variant == "paper_literal":
        pairs.append(("X1", "Y"))
    if noise_structure == "chain":
        pairs += list(zip(noise[:-1], noise[1:]))
    elif noise:
        latent.append("F")
        pairs += [("F", x) for x in noise]
    nodes = list(observed_columns(noise_covariates)) + latent
    return ProjectionSpec.from_latent(MixedGraph(nodes, directed(*pairs)), latent)


def _expit(x):
    return 1.0 / (1.0 + np.exp(-x))


def generate(spec: SimSpec, keep_latent: bool = False) -> Dataset:
    """Draw one dataset; columns S, X1..Xk, W, Y (plus latents if asked).

    Draws happen in a fixed order from a generator seeded by ``spec.seed``,
    so equal specs give identical data.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    e = lambda: rng.normal(0.0, NOISE_SD, n)  # noqa: E731
    u = rng.binomial(1, 0.5, n).astype(float)
    u1 = rng.normal(size=n)
    u2 = rng.normal(size=n)
    u3 = rng.normal(size=n) if spec.group == "II" else None
    s = rng.normal(size=n) + 0.8 * u2 + e()
    if u3 is not None:
        s = s + 0.8 * u3
    x2 = rng.normal(size=n)
    x1 = 0.3 + s + x2 + u1 + e()
    x3 = rng.normal(size=n) + 0.8 * u2 + e()
    noise, f = _noise_block(rng, n, spec)
    drive = 2.0 * s if spec.group == "I" else 2.0 * u3
    w = rng.binomial(1, _expit(-(1.0 - 2.0 * u - drive))).astype(float)
    y = 2.0 + BETA_TRUE * w + 2.0 * u + 2.0 * u1 + 2.0 * x3 + e()
    if spec.variant == "paper_literal":
        y = y + 2.0 * x1
    cols = {"S": s, "X1": x1, "X2": x2, "X3": x3}
    cols.update(zip(_noise_names(spec.noise_covariates), noise))
    cols.update(W=w, Y=y)
    if keep_latent:
        cols.update(U=u, U1=u1, U2=u2)
        if u3 is not None:
            cols["U3"] = u3
        if f is not None:
            cols["F"] = f
    return Dataset.from_columns(cols)


def _noise_block(rng, n, spec):
    k, rho = spec.noise_covariates, spec.noise_corr
    if k == 0:
        return [], None
    if spec.noise_structure == "chain":
        out = [rng.normal(size=n)]
        for _ in range(k - 1):
            out.append(rho * out[-1] + math.sqrt(1.0 - rho * rho) * rng.normal(size=n))
        return out, None
    f = rng.normal(size=n)
    return [math.sqrt(rho) * f + math.sqrt(1.0 - rho) * rng.normal(size=n) for _ in range(k)], f


@dataclass(frozen=True)
class BenchmarkRow:
    group: str
    n: int
    method: str
    mean_bias_pct: float
    reps: int
    failed: int = 0
    errors: tuple[str, ...] = ()


@dataclass
class BenchmarkReport:
    rows: list[BenchmarkRow] = field(default_factory=list)

    def cell(self, group: str, n: int, method: str) -> BenchmarkRow:
        for r in self.rows:
            if (r.group, r.n, r.method) == (group, n, method):
                return r
        raise KeyError((group, n, method))

    def to_csv(self, path, precision: int = 6) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(self.to_text(precision))

    def to_text(self, precision: int = 6) -> str:
        lines = ["group,n,method,mean_bias_pct,reps"]
        for r in self.rows:
            lines.append(f"{r.group},{r.n},{r.method},{_fmt(r.mean_bias_pct, precision)},{r.reps}")
        return "\n".join(lines) + "\n"


def _fmt(x: float, precision: int) -> str:
    return "nan" if x != x else f"{x:.{precision}g}"


def replication_seed(seed: int, group: str, n: int, rep: int) -> int:
    """Independent stream per (group, n, replication), whatever the scheduling."""
    ss = np.random.SeedSequence([seed, GROUPS.index(group), n, rep])
    return int(ss.generate_state(1, np.uint64)[0])


def _estimate(method: str, data: Dataset, config: LearnerConfig) -> float:
    if method == "aivip":
        return aivip(data, ROLES, config).beta_hat
    if method == "tsls":
        return tsls(data, ROLES).beta_hat
    if method == "tslsciv":
        return tslsciv(data, ROLES).beta_hat
    return two_stage(data, ROLES, ORACLE_Z, method="oracle_z").beta_hat


def _replicate(args) -> list[tuple[str, float | None, str | None]]:
    group, n, rep, seed, methods, variant, noise_covariates, noise_structure, config = args
    spec = SimSpec(group, n, replication_seed(seed, group, n, rep), variant, noise_covariates, noise_structure)
    data = generate(spec)
    out = []
    for m in methods:
        try:
            out.append((m, bias(_estimate(m, data, config), BETA_TRUE), None))
        except (EstimationError, GraphError) as exc:
            out.append((m, None, f"{type(exc).__name__}: {exc}"))
    return out


def run_benchmark(groups: Sequence[str], sizes: Sequence[int], methods: Sequence[str], replications: int, seed: int = 0,
                  variant: str = "consistent", config: LearnerConfig = LearnerConfig(), jobs: int = 1,
                  noise_covariates: int = 20, noise_structure: str = "chain") -> BenchmarkReport:
    """Mean bias (%) per (group, n, method) cell.

    Every method sees the same dataset within a replication. Failed
    estimates are counted per cell; a cell whose replications all fail
    reports NaN. Results do not depend on ``jobs``.
    """
    if replications < 1:
        raise ValueError("replications must be at least 1")
    for g in groups:
        if g not in GROUPS:
            raise ValueError(f"unknown group {g!r}")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
    for n in sizes:
        if n < 100:
            raise ValueError(f"sample size must be at least 100, got {n}")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    methods = tuple(methods)
    tasks = [(g, n, r, seed, methods, variant, noise_covariates, noise_structure, config)
             for g in groups for n in sizes for r in range(replications)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_replicate, tasks))
    else:
        results = [_replicate(t) for t in tasks]
    cells: dict[tuple, list] = {}
    for task, res in zip(tasks, results):
        for m, b, err in res:
            cells.setdefault((task[0], task[1], m), []).append((b, err))
    report = BenchmarkReport()
    for g in groups:
        for n in sizes:
            for m in methods:
                vals = cells[(g, n, m)]
                ok = [b for b, _ in vals if b is not None]
                errs = tuple(e for _, e in vals if e is not None)
                mean = float(np.mean(ok)) if ok else float("nan")
                report.rows.append(BenchmarkRow(g, n, m, mean, len(ok), len(errs), errs))
    return report
