"""Conditional-independence tests.

Both backends are callables ``test(i, j, k) -> CiDecision`` over node/column
names and expose the ``nodes`` they can be asked about, which is all the
learner needs.

The Fisher-z test is also applied to binary columns (the treatment in the
benchmark); this is the usual approximation in constraint-based search on
mixed data.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import erfc, log, sqrt
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .data import Dataset
from .graph import GraphError, MixedGraph
from .separation import _m_connected, _require_dag

R_CLAMP = 1.0 - 1e-12


class CiError(ValueError):
    """A conditional-independence query that cannot be answered."""


@dataclass(frozen=True)
class CiDecision:
    independent: bool
    p_value: float | None
    statistic: float


def fisher_z_statistic(r: float, n: int, k: int) -> tuple[float, float]:
    """Fisher z statistic and its two-sided normal p-value."""
    r = min(max(r, -R_CLAMP), R_CLAMP)
    z = 0.5 * log((1.0 + r) / (1.0 - r)) * sqrt(n - k - 3)
    return z, erfc(abs(z) / sqrt(2.0))


class FisherZ:
    """Partial-correlation test on a dataset's cached correlation matrix."""

    def __init__(self, data: Dataset, alpha: float = 0.05):
        if not 0.0 < alpha < 1.0:
            raise CiError(f"alpha must lie in (0, 1), got {alpha}")
        self.data = data
        self.alpha = alpha
        self.nodes = data.columns
        self._corr = data.correlation()

    def __call__(self, i: str, j: str, k: Iterable[str] = ()) -> CiDecision:
        k = tuple(k)
        if i == j:
            raise CiError("cannot test a variable against itself")
        if i in k or j in k:
            raise CiError("tested variables may not be in the conditioning set")
        n = self.data.n
        if n <= len(k) + 3:
            raise CiError(f"insufficient sample size {n} for conditioning set of size {len(k)}")
        idx = np.array([self.data.index(v) for v in (i, j, *k)], dtype=np.intp)
        r = kernels.partial_corr(self._corr, idx)
        if r != r:
            raise CiError(f"degenerate columns in test {i} _||_ {j} | {list(k)}")
        z, p = fisher_z_statistic(r, n, len(k))
        return CiDecision(p > self.alpha, p, z)


def fisher_z(data: Dataset, i: str, j: str, k: Iterable[str] = (), alpha: float = 0.05) -> CiDecision:
    return FisherZ(data, alpha)(i, j, k)


class DSepOracle:
    """Ground-truth test: d-separation in a (latent) DAG."""

    def __init__(self, dag: MixedGraph, observed: Sequence[str] | None = None):
        _require_dag(dag)
        self.dag = dag
        self.nodes = tuple(observed) if observed is not None else dag.nodes
        for v in self.nodes:
            dag.index(v)

    def __call__(self, i: str, j: str, k: Iterable[str] = ()) -> CiDecision:
        k = tuple(k)
        if i == j:
            raise CiError("cannot test a variable against itself")
        if i in k or j in k:
            raise CiError("tested variables may not be in the conditioning set")
        try:
            sep = not _m_connected(self.dag, i, j, k)
        except GraphError as exc:
            raise CiError(str(exc)) from None
        return CiDecision(sep, None, 0.0 if sep else 1.0)


def oracle_test(dag: MixedGraph, i: str, j: str, k: Iterable[str] = ()) -> CiDecision:
    return DSepOracle(dag)(i, j, k)
