"""Latent projection of DAGs onto MAGs, edge visibility, Markov equivalence.

``pag_oracle`` builds the PAG of a small MAG by enumerating every
orientation of its skeleton, so it serves as ground truth for the learner.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import kernels
from .graph import GraphError, GraphKind, Mark, MixedGraph, check_kind

EQUIVALENCE_MAX_NODES = 10
PAG_ORACLE_MAX_NODES = 5


@dataclass(frozen=True)
class ProjectionSpec:
    """A DAG together with its observed/latent split."""

    dag: MixedGraph
    observed: tuple[str, ...]
    latent: tuple[str, ...]

    def __post_init__(self):
        obs, lat = set(self.observed), set(self.latent)
        if obs & lat:
            raise GraphError(f"nodes both observed and latent: {sorted(obs & lat)}")
        if obs | lat != set(self.dag.nodes):
            raise GraphError("observed and latent sets must cover the DAG's nodes")
        # keep DAG node order
        object.__setattr__(self, "observed", tuple(v for v in self.dag.nodes if v in obs))
        object.__setattr__(self, "latent", tuple(v for v in self.dag.nodes if v in lat))

    @classmethod
    def from_latent(cls, dag: MixedGraph, latent: Iterable[str]) -> "ProjectionSpec":
        latent = set(latent)
        for v in latent:
            dag.index(v)
        return cls(dag, tuple(v for v in dag.nodes if v not in latent), tuple(latent))


def inducing_path_exists(g: MixedGraph, x: str, y: str, latent: Iterable[str] = ()) -> bool:
    """Is there a path whose interior nodes are latent non-colliders or
    colliders in An(x) | An(y)?"""
    xi, yi = g.index(x), g.index(y)
    if xi == yi:
        raise GraphError("x and y must differ")
    lat = g._mask(latent)
    if lat[xi] or lat[yi]:
        raise GraphError("endpoints cannot be latent")
    if g.has_circles():
        raise GraphError("inducing paths need a graph without circle marks")
    m = g.matrix
    anc = kernels.ancestor_mask(m, g._mask((x, y)))
    seen = np.zeros((len(g), 2), dtype=bool)
    queue = deque()
    for c in g._nbrs[xi]:
        if c == yi:
            return True
        s = (c, int(m[xi, c] == Mark.ARROW))
        seen[s] = True
        queue.append(s)
    while queue:
        v, into = queue.popleft()
        for c in g._nbrs[v]:
            if into and m[c, v] == Mark.ARROW:
                if not anc[v]:
                    continue
            elif not lat[v]:
                continue
            if c == yi:
                return True
            s = (c, int(m[v, c] == Mark.ARROW))
            if not seen[s]:
                seen[s] = True
                queue.append(s)
    return False


def dag_to_mag(spec: ProjectionSpec | MixedGraph, latent: Iterable[str] | None = None) -> MixedGraph:
    """Project a DAG onto its observed nodes.

    Observed ``a``, ``b`` are adjacent iff an inducing path relative to the
    latent set joins them; the edge is ``a -> b`` when ``a`` is an ancestor of
    ``b`` in the DAG, ``a <- b`` in the reverse case, ``a <-> b`` otherwise.
    """
    if isinstance(spec, MixedGraph):
        spec = ProjectionSpec.from_latent(spec, latent or ())
    dag = spec.dag
    verdict = check_kind(dag, GraphKind.DAG)
    if not verdict:
        raise GraphError(f"projection needs a DAG: {verdict.reason}")
    obs = spec.observed
    n = len(obs)
    anc = {v: set(dag.ancestors(v)) for v in obs}
    m = np.zeros((n, n), dtype=np.int8)
    for i, j in itertools.combinations(range(n), 2):
        a, b = obs[i], obs[j]
        if not inducing_path_exists(dag, a, b, spec.latent):
            continue
        a_anc_b = a in anc[b]
        b_anc_a = b in anc[a]
        if a_anc_b and not b_anc_a:
            m[j, i], m[i, j] = Mark.TAIL, Mark.ARROW
        elif b_anc_a and not a_anc_b:
            m[j, i], m[i, j] = Mark.ARROW, Mark.TAIL
        else:
            m[j, i] = m[i, j] = Mark.ARROW
    return MixedGraph.from_matrix(obs, m)


# -- visibility ---------------------------------------------------------------


def _is_parent(m, p, c) -> bool:
    return m[p, c] == Mark.ARROW and m[c, p] == Mark.TAIL


def _visible(g: MixedGraph, a: str, b: str) -> bool:
    ai, bi = g.index(a), g.index(b)
    m = g.matrix
    nbrs = g._nbrs

    def far(k):
        return k != bi and not m[k, bi]

    # edge into a from a node not adjacent to b
    for k in nbrs[ai]:
        if m[k, ai] == Mark.ARROW and far(k):
            return True
    # collider path k *-> c_r <-> ... <-> c_1 <-> a, each c a parent of b
    start = [c for c in nbrs[ai] if m[c, ai] == Mark.ARROW and m[ai, c] == Mark.ARROW and _is_parent(m, c, bi)]
    seen = set(start) | {ai}
    queue = deque(start)
    while queue:
        c = queue.popleft()
        for k in nbrs[c]:
            if k in seen or m[k, c] != Mark.ARROW:
                continue
            if far(k):
                return True
            if m[c, k] == Mark.ARROW and _is_parent(m, k, bi):
                seen.add(k)
                queue.append(k)
    return False


def _require_directed(g: MixedGraph, a: str, b: str) -> None:
    e = g.edge(a, b)
    if e is None:
        raise GraphError(f"no edge between {a!r} and {b!r}")
    if e != (Mark.TAIL, Mark.ARROW):
        raise GraphError(f"edge {a}-{b} is not directed {a} -> {b}")


def is_visible(m: MixedGraph, a: str, b: str) -> bool:
    """Visibility of the directed MAG edge ``a -> b``."""
    _require_directed(m, a, b)
    if m.has_circles():
        raise GraphError("visibility is defined on MAGs; use is_definitely_visible for PAGs")
    return _visible(m, a, b)


def is_definitely_visible(p: MixedGraph, a: str, b: str) -> bool:
    """Visibility of ``a -> b`` certified by the PAG's definite marks alone."""
    _require_directed(p, a, b)
    return _visible(p, a, b)


# -- Markov equivalence --------------------------------------------------------


def _separation_model(g: MixedGraph, pairs) -> list[tuple[int, int, np.ndarray, bool]]:
    n = len(g)
    out = []
    for i, j in pairs:
        rest = [k for k in range(n) if k not in (i, j)]
        for r in range(len(rest) + 1):
            for zs in itertools.combinations(rest, r):
                mask = np.zeros(n, dtype=np.uint8)
                mask[list(zs)] = 1
                out.append((i, j, mask, not kernels.m_connected(g.matrix, i, j, mask)))
    return out


def _matches(matrix, model) -> bool:
    for i, j, mask, sep in model:
        if (not kernels.m_connected(matrix, i, j, mask)) != sep:
            return False
    return True


def markov_equivalent(m1: MixedGraph, m2: MixedGraph) -> bool:
    """Identical m-separation models over the same node set."""
    if set(m1.nodes) != set(m2.nodes):
        raise GraphError("graphs have different node sets")
    if len(m1) > EQUIVALENCE_MAX_NODES:
        raise GraphError(f"equivalence check is limited to {EQUIVALENCE_MAX_NODES} nodes")
    if m1.has_circles() or m2.has_circles():
        raise GraphError("equivalence check needs MAGs")
    if m2.nodes != m1.nodes:
        m2 = m2.subgraph(m1.nodes)
        m2 = MixedGraph.from_matrix(m1.nodes, _reorder(m2, m1.nodes))
    a1, a2 = m1.matrix != 0, m2.matrix != 0
    n = len(m1)
    pairs = [(i, j) for i, j in itertools.combinations(range(n), 2) if not (a1[i, j] and a2[i, j])]
    # pairs adjacent in both graphs are m-connected under every set
    return _matches(m2.matrix, _separation_model(m1, pairs))


def _reorder(g: MixedGraph, order) -> np.ndarray:
    idx = [g.index(v) for v in order]
    return g.matrix[np.ix_(idx, idx)]


def _ancestral_matrix(m: np.ndarray) -> bool:
    n = m.shape[0]
    directed = (m == Mark.ARROW) & (m.T == Mark.TAIL)  # directed[i, j]: i -> j
    # Kahn's algorithm for acyclicity
    indeg = directed.sum(axis=0)
    order = [i for i in range(n) if indeg[i] == 0]
    k = 0
    indeg = indeg.copy()
    while k < len(order):
        v = order[k]
        k += 1
        for c in np.flatnonzero(directed[v]):
            indeg[c] -= 1
            if indeg[c] == 0:
                order.append(c)
    if len(order) < n:
        return False
    # strict ancestor relation by transitive closure in topological order
    anc = np.zeros((n, n), dtype=bool)  # anc[a, b]: a is a proper ancestor of b
    for v in order:
        for c in np.flatnonzero(directed[v]):
            anc[:, c] |= anc[:, v]
            anc[v, c] = True
    bi = (m == Mark.ARROW) & (m.T == Mark.ARROW)
    return not np.any(bi & (anc | anc.T))


def markov_class(m: MixedGraph) -> list[MixedGraph]:
    """All MAGs on ``m``'s skeleton that are Markov equivalent to ``m``.

    Edges take the states ``->``, ``<-`` and ``<->``; undirected edges are
    excluded since selection variables are not modelled.
    """
    if len(m) > PAG_ORACLE_MAX_NODES:
        raise GraphError(f"equivalence-class enumeration is limited to {PAG_ORACLE_MAX_NODES} nodes")
    if m.has_circles():
        raise GraphError("pag_oracle needs a MAG")
    n = len(m)
    base = m.matrix
    adj = base != 0
    edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if adj[i, j]]
    nonadj = [(i, j) for i, j in itertools.combinations(range(n), 2) if not adj[i, j]]
    model = _separation_model(m, nonadj)
    # unshielded colliders are shared by every member: cheap necessary filter
    triples = []
    for b in range(n):
        nb = np.flatnonzero(adj[b])
        for a, c in itertools.combinations(nb, 2):
            if not adj[a, c]:
                triples.append((a, b, c, base[a, b] == Mark.ARROW and base[c, b] == Mark.ARROW))
    states = ((Mark.TAIL, Mark.ARROW), (Mark.ARROW, Mark.TAIL), (Mark.ARROW, Mark.ARROW))
    out = []
    cand = np.zeros((n, n), dtype=np.int8)
    for combo in itertools.product(states, repeat=len(edges)):
        for (i, j), (mi, mj) in zip(edges, combo):
            cand[j, i] = mi
            cand[i, j] = mj
        if any((cand[a, b] == Mark.ARROW and cand[c, b] == Mark.ARROW) != col for a, b, c, col in triples):
            continue
        if not _ancestral_matrix(cand):
            continue
        if _matches(cand, model):
            out.append(MixedGraph.from_matrix(m.nodes, cand))
    return out


def pag_oracle(m: MixedGraph) -> MixedGraph:
    """PAG of ``m``: marks shared by the whole Markov class, circles elsewhere."""
    members = markov_class(m)
    stack = np.stack([g.matrix for g in members])
    agree = np.all(stack == stack[0], axis=0)
    out = np.where(agree, stack[0], np.int8(Mark.CIRCLE)).astype(np.int8)
    out[m.matrix == 0] = 0
    return MixedGraph.from_matrix(m.nodes, out)
