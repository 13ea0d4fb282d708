"""d-separation, m-separation and D-SEP sets.

The fast test is a reachability search over (node, entered-through-an-
arrowhead) states, run by the compiled kernel when available. A literal
path-enumeration oracle is kept alongside it for property tests.

When a query is run on a manipulated graph, descendants of colliders are
taken in that same graph.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import kernels
from .graph import GraphError, GraphKind, Mark, MixedGraph, check_kind, is_ancestral

BRUTE_FORCE_MAX_NODES = 12


@dataclass(frozen=True)
class SepResult:
    separated: bool
    witness: tuple[str, ...] | None = None

    def __bool__(self) -> bool:
        return self.separated


def _query(g: MixedGraph, x: str, y: str, z: Iterable[str]) -> tuple[str, ...]:
    g.index(x)
    g.index(y)
    z = tuple(z)
    for v in z:
        g.index(v)
    if x == y:
        raise GraphError("x and y must differ")
    if x in z or y in z:
        raise GraphError("x and y must not be in the conditioning set")
    return z


def _m_connected(g: MixedGraph, x: str, y: str, z: Iterable[str]) -> bool:
    # unchecked fast path
    mask = np.zeros(len(g), dtype=np.uint8)
    for v in z:
        mask[g.index(v)] = 1
    return kernels.m_connected(g.matrix, g.index(x), g.index(y), mask)


def _require_ancestral(g: MixedGraph) -> None:
    ok = g._cache.get("ancestral")
    if ok is None:
        ok = g._cache["ancestral"] = is_ancestral(g)
    if not ok:
        if g.has_circles():
            raise GraphError("m-separation needs a graph without circle marks")
        raise GraphError("graph is not ancestral")


def _require_dag(g: MixedGraph) -> None:
    ok = g._cache.get("dag")
    if ok is None:
        ok = g._cache["dag"] = check_kind(g, GraphKind.DAG).valid
    if not ok:
        raise GraphError("d-separation needs a DAG")


def m_separated(g: MixedGraph, x: str, y: str, z: Iterable[str] = ()) -> SepResult:
    """m-separation of ``x`` and ``y`` given ``z`` in an ancestral graph."""
    z = _query(g, x, y, z)
    _require_ancestral(g)
    if not _m_connected(g, x, y, z):
        return SepResult(True)
    return SepResult(False, m_connecting_path(g, x, y, z))


def d_separated(g: MixedGraph, x: str, y: str, z: Iterable[str] = ()) -> SepResult:
    """d-separation in a DAG (the DAG case of m-separation)."""
    z = _query(g, x, y, z)
    _require_dag(g)
    if not _m_connected(g, x, y, z):
        return SepResult(True)
    return SepResult(False, m_connecting_path(g, x, y, z))


def _transitions(g: MixedGraph, zmask, anz):
    """Allowed moves between (node, into) states, excluding the start node."""
    m = g.matrix
    nbrs = g._nbrs

    def step(v, into):
        for c in nbrs[v]:
            if into and m[c, v] == Mark.ARROW:
                if not anz[v]:
                    continue
            elif zmask[v]:
                continue
            yield c, int(m[v, c] == Mark.ARROW)

    return step


def m_connecting_path(g: MixedGraph, x: str, y: str, z: Iterable[str]) -> tuple[str, ...] | None:
    """A simple m-connecting path from ``x`` to ``y`` given ``z``, or None."""
    xi, yi = g.index(x), g.index(y)
    m = g.matrix
    n = len(g)
    zmask = g._mask(z)
    anz = kernels.ancestor_mask(m, zmask)
    step = _transitions(g, zmask, anz)

    # states from which y is one legal move away, then everything that can reach them
    good = np.zeros((n, 2), dtype=bool)
    preds: dict[tuple[int, int], list[tuple[int, int]]] = {}
    queue = deque()
    for v in range(n):
        for into in (0, 1):
            for c, nxt in step(v, into):
                if c == yi:
                    if not good[v, into]:
                        good[v, into] = True
                        queue.append((v, into))
                else:
                    preds.setdefault((c, nxt), []).append((v, into))
    while queue:
        s = queue.popleft()
        for p in preds.get(s, ()):
            if not good[p]:
                good[p] = True
                queue.append(p)

    path = [xi]
    on_path = {xi}

    def dfs(v, into):
        for c, nxt in step(v, into):
            if c == yi:
                path.append(c)
                return True
            if c in on_path or not good[c, nxt]:
                continue
            path.append(c)
            on_path.add(c)
            if dfs(c, nxt):
                return True
            path.pop()
            on_path.discard(c)
        return False

    for c in g._nbrs[xi]:
        nxt = int(m[xi, c] == Mark.ARROW)
        if c == yi:
            return (x, y)
        if not good[c, nxt]:
            continue
        path.append(c)
        on_path.add(c)
        if dfs(c, nxt):
            return tuple(g.nodes[i] for i in path)
        path.pop()
        on_path.discard(c)
    return None


def simple_paths(g: MixedGraph, x: str, y: str) -> Iterator[tuple[str, ...]]:
    """All simple paths from ``x`` to ``y`` in node order."""
    xi, yi = g.index(x), g.index(y)
    path = [xi]
    on_path = {xi}

    def rec(v):
        for c in g._nbrs[v]:
            if c == yi:
                yield tuple(g.nodes[i] for i in path) + (y,)
            elif c not in on_path:
                path.append(c)
                on_path.add(c)
                yield from rec(c)
                path.pop()
                on_path.discard(c)

    yield from rec(xi)


def path_is_m_connecting(g: MixedGraph, path: Sequence[str], z: Iterable[str]) -> bool:
    """Literal blocking check of one path: colliders need a descendant in z."""
    z = set(z)
    for k in range(1, len(path) - 1):
        a, b, c = path[k - 1], path[k], path[k + 1]
        collider = g.mark(a, b) == Mark.ARROW and g.mark(c, b) == Mark.ARROW
        if collider:
            if not z.intersection(g.descendants(b)):
                return False
        elif b in z:
            return False
    return True


def m_separated_bruteforce(g: MixedGraph, x: str, y: str, z: Iterable[str] = ()) -> SepResult:
    """Reference oracle: enumerate every simple path and test it directly."""
    if len(g) > BRUTE_FORCE_MAX_NODES:
        raise GraphError(f"brute-force separation is limited to {BRUTE_FORCE_MAX_NODES} nodes")
    z = _query(g, x, y, z)
    if g.has_circles():
        raise GraphError("m-separation needs a graph without circle marks")
    for path in simple_paths(g, x, y):
        if path_is_m_connecting(g, path, z):
            return SepResult(False, path)
    return SepResult(True)


def d_sep_set(g: MixedGraph, x: str, y: str, _checked: bool = False) -> tuple[str, ...]:
    """D-SEP(x, y): nodes with a collider path to ``x`` inside An(x) | An(y).

    ``y`` itself is never returned.
    """
    xi, yi = g.index(x), g.index(y)
    if not _checked:
        if x == y:
            raise GraphError("x and y must differ")
        if g.has_circles():
            raise GraphError("D-SEP needs a graph without circle marks")
    m = g.matrix
    if m[xi, yi]:
        raise GraphError("D-SEP undefined for adjacent pair")
    anc = g._mask(g.ancestors((x, y)))
    seen = np.zeros((len(g), 2), dtype=bool)
    queue = deque()
    for c in g._nbrs[xi]:
        if anc[c]:
            s = (c, int(m[xi, c] == Mark.ARROW))
            seen[s] = True
            queue.append(s)
    while queue:
        v, into = queue.popleft()
        if not into:
            continue
        for c in g._nbrs[v]:
            if c == xi or not anc[c] or m[c, v] != Mark.ARROW:
                continue
            s = (c, int(m[v, c] == Mark.ARROW))
            if not seen[s]:
                seen[s] = True
                queue.append(s)
    members = set(np.flatnonzero(seen.any(axis=1)).tolist()) - {xi, yi}
    return g._names(members)
