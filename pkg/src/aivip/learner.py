"""Constraint-based PAG learning (FCI family).

By default the search runs in the fast mode: conditioning sets are drawn
from current adjacency neighbourhoods only and the Possible-D-SEP stage is
skipped. ``use_possible_dsep=True`` enables the full FCI search.

Orientation uses the collider rule followed by rules R1-R4 and R8-R10 to a
fixpoint. Rules R5-R7 only concern selection variables, which are not
modelled. Only circle marks are ever overwritten, so conflicting evidence
from noisy tests resolves in favour of the first orientation made.
"""

from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .ci import CiDecision, FisherZ
from .data import Dataset
from .graph import Mark, MixedGraph

log = logging.getLogger(__name__)

TAIL, ARROW, CIRCLE = int(Mark.TAIL), int(Mark.ARROW), int(Mark.CIRCLE)

CiTest = Callable[[str, str, tuple], CiDecision]


@dataclass(frozen=True)
class LearnerConfig:
    alpha: float = 0.05
    max_cond_size: int | None = None
    use_possible_dsep: bool = False
    conservative_colliders: bool = False

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.max_cond_size is not None and self.max_cond_size < 0:
            raise ValueError("max_cond_size must be >= 0")


class SepsetTable:
    """Separating set recorded for each removed pair."""

    def __init__(self):
        self._sets: dict[frozenset, tuple[str, ...]] = {}

    def record(self, a: str, b: str, z: Iterable[str]) -> None:
        self._sets[frozenset((a, b))] = tuple(z)

    def get(self, a: str, b: str) -> tuple[str, ...] | None:
        return self._sets.get(frozenset((a, b)))

    def __contains__(self, pair) -> bool:
        return frozenset(pair) in self._sets

    def __len__(self) -> int:
        return len(self._sets)

    def items(self):
        for k, v in self._sets.items():
            yield tuple(sorted(k)), v


class _CachedTest:
    # one call per unordered pair and conditioning set
    def __init__(self, test: CiTest):
        self.test = test
        self.cache: dict = {}
        self.calls = 0

    def __call__(self, a: str, b: str, z: tuple) -> bool:
        key = (min(a, b), max(a, b), tuple(sorted(z)))
        hit = self.cache.get(key)
        if hit is None:
            self.calls += 1
            hit = self.cache[key] = self.test(a, b, z).independent
        return hit


def _as_test(test: CiTest | _CachedTest) -> _CachedTest:
    return test if isinstance(test, _CachedTest) else _CachedTest(test)


def learn_skeleton(test: CiTest, nodes: Sequence[str], config: LearnerConfig = LearnerConfig()) -> tuple[MixedGraph, SepsetTable]:
    """Adjacency search from the complete graph.

    Level ``l`` tests every remaining edge ``(a, b)`` against subsets of size
    ``l`` of the level's frozen neighbourhoods of ``a`` then ``b``, in
    lexicographic node order; the first independence found is recorded and
    all removals of a level are applied together.
    """
    ctest = _as_test(test)
    nodes = tuple(nodes)
    n = len(nodes)
    adj = ~np.eye(n, dtype=bool)
    sepsets = SepsetTable()
    level = 0
    while config.max_cond_size is None or level <= config.max_cond_size:
        nbrs = [np.flatnonzero(adj[i]).tolist() for i in range(n)]
        testable = False
        removals = []
        for i, j in itertools.combinations(range(n), 2):
            if not adj[i, j]:
                continue
            found = None
            for a, b in ((i, j), (j, i)):
                cands = [k for k in nbrs[a] if k != b]
                if len(cands) < level:
                    continue
                testable = True
                for ks in itertools.combinations(cands, level):
                    z = tuple(nodes[k] for k in ks)
                    if ctest(nodes[i], nodes[j], z):
                        found = z
                        break
                if found is not None:
                    break
            if found is not None:
                removals.append((i, j, found))
        for i, j, z in removals:
            adj[i, j] = adj[j, i] = False
            sepsets.record(nodes[i], nodes[j], z)
        if not testable:
            break
        level += 1
    m = np.where(adj, CIRCLE, 0).astype(np.int8)
    log.debug("skeleton: %d edges after %d tests", int(adj.sum()) // 2, ctest.calls)
    return MixedGraph.from_matrix(nodes, m), sepsets


# -- orientation -----------------------------------------------------------------


def _unshielded_triples(m: np.ndarray):
    n = m.shape[0]
    for k in range(n):
        nb = np.flatnonzero(m[k])
        for i, j in itertools.combinations(nb, 2):
            if not m[i, j]:
                yield int(i), k, int(j)


def _orient_colliders(m: np.ndarray, nodes, sepsets: SepsetTable, skip=frozenset()) -> None:
    for i, k, j in _unshielded_triples(m):
        if (i, k, j) in skip:
            continue
        sep = sepsets.get(nodes[i], nodes[j])
        if sep is None or nodes[k] in sep:
            continue
        if m[i, k] == CIRCLE:
            m[i, k] = ARROW
        if m[j, k] == CIRCLE:
            m[j, k] = ARROW


def orient_v_structures(skeleton: MixedGraph, sepsets: SepsetTable, ambiguous: Iterable[tuple[str, str, str]] = ()) -> MixedGraph:
    """Arrowheads at ``k`` for unshielded ``i - k - j`` with ``k`` outside
    sepset(i, j); triples listed in ``ambiguous`` are left alone."""
    m = skeleton.matrix.copy()
    idx = skeleton.index
    skip = set()
    for i, k, j in ambiguous:
        skip.add((idx(i), idx(k), idx(j)))
        skip.add((idx(j), idx(k), idx(i)))
    _orient_colliders(m, skeleton.nodes, sepsets, skip)
    return MixedGraph.from_matrix(skeleton.nodes, m)


def _set(m, a, b, mark) -> bool:
    # mark at b on edge a-b; circles only
    if m[a, b] == CIRCLE:
        m[a, b] = mark
        return True
    return False


def _is_parent(m, a, b) -> bool:
    return m[a, b] == ARROW and m[b, a] == TAIL


def _rule1(m, nbrs) -> bool:
    changed = False
    n = m.shape[0]
    for b in range(n):
        for a in nbrs[b]:
            if m[a, b] != ARROW:
                continue
            for c in nbrs[b]:
                if c == a or m[a, c] or m[c, b] != CIRCLE:
                    continue
                m[c, b] = TAIL
                _set(m, b, c, ARROW)
                changed = True
    return changed


def _rule2(m, nbrs) -> bool:
    changed = False
    n = m.shape[0]
    for a in range(n):
        for c in nbrs[a]:
            if m[a, c] != CIRCLE:
                continue
            for b in nbrs[a]:
                if b == c or not m[b, c]:
                    continue
                if (_is_parent(m, a, b) and m[b, c] == ARROW) or (m[a, b] == ARROW and _is_parent(m, b, c)):
                    m[a, c] = ARROW
                    changed = True
                    break
    return changed


def _rule3(m, nbrs) -> bool:
    changed = False
    n = m.shape[0]
    for t in range(n):
        for b in nbrs[t]:
            if m[t, b] != CIRCLE:
                continue
            cands = [a for a in nbrs[b] if a != t and m[a, b] == ARROW and m[a, t] == CIRCLE and m[t, a]]
            done = False
            for a, c in itertools.combinations(cands, 2):
                if not m[a, c]:
                    m[t, b] = ARROW
                    changed = done = True
                    break
            if done:
                continue
    return changed


def _discriminating_theta(m, nbrs, a, b, c):
    """First node theta of a discriminating path <theta, ..., a, b, c> for b."""
    # a is a collider on the path (arrowhead from b) and a parent of c
    seen = {a, b, c}
    prev = {a: None}
    queue = deque([a])
    while queue:
        v = queue.popleft()
        for d in nbrs[v]:
            if d in seen or m[d, v] != ARROW:
                continue
            if not m[d, c]:
                return d
            if m[v, d] == ARROW and _is_parent(m, d, c):
                seen.add(d)
                prev[d] = v
                queue.append(d)
    return None


def _rule4(m, nbrs, nodes, sepsets: SepsetTable | None) -> bool:
    if sepsets is None:
        return False
    changed = False
    n = m.shape[0]
    for c in range(n):
        for b in nbrs[c]:
            if m[c, b] != CIRCLE:
                continue
            for a in nbrs[b]:
                if a == c or not m[a, c] or m[b, a] != ARROW or not _is_parent(m, a, c):
                    continue
                theta = _discriminating_theta(m, nbrs, a, b, c)
                if theta is None:
                    continue
                sep = sepsets.get(nodes[theta], nodes[c])
                if sep is None:
                    continue
                if nodes[b] in sep:
                    m[c, b] = TAIL
                    _set(m, b, c, ARROW)
                else:
                    _set(m, a, b, ARROW)
                    _set(m, c, b, ARROW)
                    _set(m, b, c, ARROW)
                changed = True
                break
    return changed


def _rule8(m, nbrs) -> bool:
    changed = False
    n = m.shape[0]
    for a in range(n):
        for c in nbrs[a]:
            if not (m[c, a] == CIRCLE and m[a, c] == ARROW):
                continue
            for b in nbrs[a]:
                if b == c or not _is_parent(m, b, c):
                    continue
                if _is_parent(m, a, b) or (m[b, a] == TAIL and m[a, b] == CIRCLE):
                    m[c, a] = TAIL
                    changed = True
                    break
    return changed


def _pd(m, u, v) -> bool:
    # edge u *-* v may lie on a potentially directed path u ... v
    return m[v, u] != ARROW and m[u, v] != TAIL


def _uncovered_pd_exists(m, nbrs, path, target, forbid_first_adj=None) -> bool:
    """Extend ``path`` into an uncovered potentially directed path ending at
    ``target``."""
    on = set(path)

    def rec(prev, cur):
        for nxt in nbrs[cur]:
            if nxt in on or not _pd(m, cur, nxt) or m[prev, nxt]:
                continue
            if nxt == target:
                return True
            on.add(nxt)
            if rec(cur, nxt):
                return True
            on.discard(nxt)
        return False

    return rec(path[-2], path[-1])


def _rule9(m, nbrs) -> bool:
    changed = False
    n = m.shape[0]
    for a in range(n):
        for c in nbrs[a]:
            if not (m[c, a] == CIRCLE and m[a, c] == ARROW):
                continue
            for b in nbrs[a]:
                if b == c or m[b, c] or not _pd(m, a, b):
                    continue
                if _uncovered_pd_exists(m, nbrs, [a, b], c):
                    m[c, a] = TAIL
                    changed = True
                    break
    return changed


def _first_steps(m, nbrs, a, target) -> set[int]:
    """Second nodes of uncovered potentially directed paths from ``a`` to
    ``target`` (the trivial path contributes ``target`` itself)."""
    out = set()
    for mu in nbrs[a]:
        if not _pd(m, a, mu):
            continue
        if mu == target or _uncovered_pd_exists(m, nbrs, [a, mu], target):
            out.add(mu)
    return out


def _rule10(m, nbrs) -> bool:
    changed = False
    n = m.shape[0]
    for a in range(n):
        for c in nbrs[a]:
            if not (m[c, a] == CIRCLE and m[a, c] == ARROW):
                continue
            parents = [b for b in nbrs[c] if b != a and _is_parent(m, b, c)]
            if len(parents) < 2:
                continue
            steps = {b: _first_steps(m, nbrs, a, b) for b in parents}
            hit = False
            for b, t in itertools.combinations(parents, 2):
                for mu in steps[b]:
                    for om in steps[t]:
                        if mu != om and not m[mu, om]:
                            hit = True
                            break
                    if hit:
                        break
                if hit:
                    break
            if hit:
                m[c, a] = TAIL
                changed = True
    return changed


def _apply_rules(m: np.ndarray, nodes, sepsets: SepsetTable | None) -> None:
    n = m.shape[0]
    nbrs = [np.flatnonzero(m[i]).tolist() for i in range(n)]
    while True:
        changed = False
        while _rule1(m, nbrs) | _rule2(m, nbrs) | _rule3(m, nbrs) | _rule4(m, nbrs, nodes, sepsets):
            changed = True
        if _rule8(m, nbrs) | _rule9(m, nbrs) | _rule10(m, nbrs):
            changed = True
        if not changed:
            break


def apply_orientation_rules(g: MixedGraph, sepsets: SepsetTable | None = None) -> MixedGraph:
    """Run R1-R4 and R8-R10 to a fixpoint; R4 needs the sepset table."""
    m = g.matrix.copy()
    _apply_rules(m, g.nodes, sepsets)
    return MixedGraph.from_matrix(g.nodes, m)


# -- Possible-D-SEP and conservative colliders -------------------------------------


def possible_d_sep(g: MixedGraph, x: str) -> tuple[str, ...]:
    """Nodes reachable from ``x`` along paths whose every interior triple is
    a collider or a triangle."""
    m = g.matrix
    xi = g.index(x)
    nbrs = g._nbrs
    seen_edges = set()
    reached = set()
    queue = deque()
    for c in nbrs[xi]:
        seen_edges.add((xi, c))
        reached.add(c)
        queue.append((xi, c))
    while queue:
        a, b = queue.popleft()
        for c in nbrs[b]:
            if c == a or c == xi or (b, c) in seen_edges:
                continue
            if (m[a, b] == ARROW and m[c, b] == ARROW) or m[a, c]:
                seen_edges.add((b, c))
                reached.add(c)
                queue.append((b, c))
    return g._names(reached)


def _possible_dsep_stage(ctest: _CachedTest, g: MixedGraph, sepsets: SepsetTable, config: LearnerConfig) -> MixedGraph:
    nodes = g.nodes
    m = g.matrix.copy()
    pds = {v: possible_d_sep(g, v) for v in nodes}
    n = len(nodes)
    for i, j in itertools.combinations(range(n), 2):
        if not m[i, j]:
            continue
        x, y = nodes[i], nodes[j]
        done = False
        for a, b in ((x, y), (y, x)):
            cands = [v for v in pds[a] if v not in (a, b)]
            top = len(cands) if config.max_cond_size is None else min(len(cands), config.max_cond_size)
            for size in range(top + 1):
                for z in itertools.combinations(cands, size):
                    if ctest(x, y, z):
                        m[i, j] = m[j, i] = 0
                        sepsets.record(x, y, z)
                        done = True
                        break
                if done:
                    break
            if done:
                break
    m[m != 0] = CIRCLE
    return MixedGraph.from_matrix(nodes, m)


def _ambiguous_triples(ctest: _CachedTest, g: MixedGraph, config: LearnerConfig) -> list[tuple[str, str, str]]:
    """Unshielded triples whose middle node is in some but not all separating
    sets found among the endpoints' neighbourhoods."""
    nodes = g.nodes
    m = g.matrix
    out = []
    for i, k, j in _unshielded_triples(m):
        if i > j:
            continue
        x, y = nodes[i], nodes[j]
        with_k = without_k = False
        for a, b in ((i, j), (j, i)):
            cands = [v for v in np.flatnonzero(m[a]).tolist() if v != b]
            top = len(cands) if config.max_cond_size is None else min(len(cands), config.max_cond_size)
            for size in range(top + 1):
                for zs in itertools.combinations(cands, size):
                    if ctest(x, y, tuple(nodes[v] for v in zs)):
                        if k in zs:
                            with_k = True
                        else:
                            without_k = True
        if with_k and without_k:
            out.append((x, nodes[k], y))
    return out


def learn_pag(source: Dataset | CiTest, config: LearnerConfig = LearnerConfig(), nodes: Sequence[str] | None = None) -> MixedGraph:
    """Learn a PAG from a dataset (Fisher-z at ``config.alpha``) or from any
    CI test callable exposing ``nodes``."""
    if isinstance(source, Dataset):
        test = FisherZ(source, config.alpha)
    else:
        test = source
    if nodes is None:
        nodes = test.nodes
    ctest = _CachedTest(test)
    skel, sepsets = learn_skeleton(ctest, nodes, config)
    if config.use_possible_dsep:
        staged = orient_v_structures(skel, sepsets)
        skel = _possible_dsep_stage(ctest, staged, sepsets, config)
    ambiguous = _ambiguous_triples(ctest, skel, config) if config.conservative_colliders else ()
    g = orient_v_structures(skel, sepsets, ambiguous)
    return apply_orientation_rules(g, sepsets)
