"""Mixed graphs with endpoint marks.

A single representation backs DAGs, MAGs and PAGs: every unordered node pair
carries at most one edge, and each edge stores one mark per endpoint
(tail, arrowhead or circle).

Ancestor and descendant sets are **reflexive**: ``v`` is always in
``ancestors(v)`` and ``descendants(v)``. Set-valued results are tuples in the
graph's node order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Iterable, Sequence

import numpy as np

from . import kernels


class GraphError(ValueError):
    """Invalid graph construction or query."""


class Mark(IntEnum):
    TAIL = 1
    ARROW = 2
    CIRCLE = 3


class GraphKind(Enum):
    DAG = "DAG"
    MAG = "MAG"
    PAG = "PAG"


class TripleStatus(Enum):
    COLLIDER = "collider"
    DEFINITE_NON_COLLIDER = "definite non-collider"
    UNCERTAIN = "uncertain"


Edge = tuple[str, Mark, Mark, str]


class MixedGraph:
    """Immutable graph over named nodes with per-endpoint edge marks.

    Parameters
    ----------
    nodes : sequence of str
        Unique, non-empty node names; their order is kept for every result.
    edges : iterable of (a, mark_at_a, mark_at_b, b)
        One entry per adjacent pair.

    Notes
    -----
    Internally ``matrix[i, j]`` is the mark at ``j`` on the edge between
    ``i`` and ``j`` (0 when the pair is not adjacent).
    """

    __slots__ = ("nodes", "_index", "_m", "_nbrs", "_cache")

    def __init__(self, nodes: Sequence[str], edges: Iterable[Edge] = ()):
        nodes = tuple(nodes)
        index: dict[str, int] = {}
        for name in nodes:
            if not isinstance(name, str) or not name:
                raise GraphError(f"invalid node name {name!r}")
            if name in index:
                raise GraphError(f"duplicate node {name!r}")
            index[name] = len(index)
        m = np.zeros((len(nodes), len(nodes)), dtype=np.int8)
        for a, ma, mb, b in edges:
            for v in (a, b):
                if v not in index:
                    raise GraphError(f"unknown node {v!r} in edge {a}-{b}")
            if a == b:
                raise GraphError(f"self-loop at {a!r}")
            i, j = index[a], index[b]
            if m[i, j]:
                raise GraphError(f"duplicate edge between {a!r} and {b!r}")
            m[j, i] = Mark(ma)
            m[i, j] = Mark(mb)
        self._init(nodes, index, m)

    def _init(self, nodes, index, m):
        m.setflags(write=False)
        self.nodes = nodes
        self._index = index
        self._m = m
        self._nbrs = tuple(tuple(np.flatnonzero(m[i]).tolist()) for i in range(len(nodes)))
        self._cache = {}

    @classmethod
    def from_matrix(cls, nodes: Sequence[str], matrix: np.ndarray) -> "MixedGraph":
        """Build from a mark matrix (``matrix[i, j]`` = mark at ``j``)."""
        nodes = tuple(nodes)
        m = np.array(matrix, dtype=np.int8, copy=True)
        n = len(nodes)
        if m.shape != (n, n):
            raise GraphError("matrix shape does not match node count")
        if np.any(np.diag(m)):
            raise GraphError("self-loop in matrix")
        if np.any((m == 0) != (m.T == 0)):
            raise GraphError("matrix is not a consistent edge map")
        if np.any((m < 0) | (m > 3)):
            raise GraphError("unknown mark code in matrix")
        index = {v: i for i, v in enumerate(nodes)}
        if len(index) != n:
            raise GraphError("duplicate node names")
        g = cls.__new__(cls)
        g._init(nodes, index, m)
        return g

    # -- basic access -----------------------------------------------------

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, v) -> bool:
        return v in self._index

    def index(self, v: str) -> int:
        try:
            return self._index[v]
        except (KeyError, TypeError):
            raise GraphError(f"unknown node {v!r}") from None

    def mark(self, a: str, b: str) -> Mark | None:
        """Mark at ``b`` on the edge between ``a`` and ``b``."""
        code = self._m[self.index(a), self.index(b)]
        return Mark(code) if code else None

    def edge(self, a: str, b: str) -> tuple[Mark, Mark] | None:
        """``(mark at a, mark at b)`` or None when not adjacent."""
        i, j = self.index(a), self.index(b)
        if not self._m[i, j]:
            return None
        return Mark(self._m[j, i]), Mark(self._m[i, j])

    def is_adjacent(self, a: str, b: str) -> bool:
        return bool(self._m[self.index(a), self.index(b)])

    def edges(self) -> list[Edge]:
        out = []
        m = self._m
        for i, a in enumerate(self.nodes):
            for j in self._nbrs[i]:
                if j > i:
                    out.append((a, Mark(m[j, i]), Mark(m[i, j]), self.nodes[j]))
        return out

    def num_edges(self) -> int:
        return int(np.count_nonzero(self._m)) // 2

    def has_circles(self) -> bool:
        return bool(np.any(self._m == Mark.CIRCLE))

    def _names(self, idx) -> tuple[str, ...]:
        return tuple(self.nodes[i] for i in sorted(idx))

    def _mask(self, names: Iterable[str]) -> np.ndarray:
        mask = np.zeros(len(self.nodes), dtype=np.uint8)
        for v in names:
            mask[self.index(v)] = 1
        return mask

    # -- neighbourhoods ---------------------------------------------------

    def adjacents(self, v: str) -> tuple[str, ...]:
        return self._names(self._nbrs[self.index(v)])

    def parents(self, v: str) -> tuple[str, ...]:
        j = self.index(v)
        m = self._m
        return self._names(i for i in self._nbrs[j] if m[i, j] == Mark.ARROW and m[j, i] == Mark.TAIL)

    def children(self, v: str) -> tuple[str, ...]:
        i = self.index(v)
        m = self._m
        return self._names(j for j in self._nbrs[i] if m[i, j] == Mark.ARROW and m[j, i] == Mark.TAIL)

    def spouses(self, v: str) -> tuple[str, ...]:
        i = self.index(v)
        m = self._m
        return self._names(j for j in self._nbrs[i] if m[i, j] == Mark.ARROW and m[j, i] == Mark.ARROW)

    def ancestors(self, vs: str | Iterable[str]) -> tuple[str, ...]:
        """Reflexive ancestors of a node or of a set of nodes."""
        if isinstance(vs, str):
            vs = (vs,)
        mask = kernels.ancestor_mask(self._m, self._mask(vs))
        return self._names(np.flatnonzero(mask))

    def descendants(self, vs: str | Iterable[str]) -> tuple[str, ...]:
        """Reflexive descendants of a node or of a set of nodes."""
        if isinstance(vs, str):
            vs = (vs,)
        mask = kernels.ancestor_mask(self._m.T, self._mask(vs))
        return self._names(np.flatnonzero(mask))

    # -- derived graphs ---------------------------------------------------

    def with_edge(self, a: str, ma: Mark, mb: Mark, b: str) -> "MixedGraph":
        """Copy with the edge ``a``-``b`` set (added or replaced)."""
        i, j = self.index(a), self.index(b)
        if i == j:
            raise GraphError(f"self-loop at {a!r}")
        m = self._m.copy()
        m[j, i] = Mark(ma)
        m[i, j] = Mark(mb)
        return MixedGraph.from_matrix(self.nodes, m)

    def without_edge(self, a: str, b: str) -> "MixedGraph":
        i, j = self.index(a), self.index(b)
        m = self._m.copy()
        m[i, j] = m[j, i] = 0
        return MixedGraph.from_matrix(self.nodes, m)

    def subgraph(self, keep: Iterable[str]) -> "MixedGraph":
        keep = set(keep)
        idx = [i for i, v in enumerate(self.nodes) if v in keep]
        if len(idx) != len(keep):
            missing = keep - set(self.nodes)
            raise GraphError(f"unknown nodes {sorted(missing)}")
        return MixedGraph.from_matrix([self.nodes[i] for i in idx], self._m[np.ix_(idx, idx)])

    # -- dunder -----------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return self.nodes == other.nodes and np.array_equal(self._m, other._m)

    def __hash__(self) -> int:
        return hash((self.nodes, self._m.tobytes()))

    def __repr__(self) -> str:
        body = ", ".join(format_edge(e) for e in self.edges())
        return f"MixedGraph(nodes={list(self.nodes)}, edges=[{body}])"


def build_graph(nodes: Sequence[str], edges: Iterable[Edge] = ()) -> MixedGraph:
    return MixedGraph(nodes, edges)


def directed(*pairs: tuple[str, str]) -> list[Edge]:
    """Shorthand: ``directed(("A", "B"))`` -> ``[("A", TAIL, ARROW, "B")]``."""
    return [(a, Mark.TAIL, Mark.ARROW, b) for a, b in pairs]


def bidirected(*pairs: tuple[str, str]) -> list[Edge]:
    return [(a, Mark.ARROW, Mark.ARROW, b) for a, b in pairs]


# -- relations --------------------------------------------------------------


@dataclass(frozen=True)
class Relations:
    parents: tuple[str, ...]
    children: tuple[str, ...]
    spouses: tuple[str, ...]
    adjacents: tuple[str, ...]
    ancestors: tuple[str, ...]
    descendants: tuple[str, ...]


def relations(g: MixedGraph, v: str) -> Relations:
    g.index(v)
    return Relations(
        parents=g.parents(v),
        children=g.children(v),
        spouses=g.spouses(v),
        adjacents=g.adjacents(v),
        ancestors=g.ancestors(v),
        descendants=g.descendants(v),
    )


def possible_ancestors(g: MixedGraph, targets: Iterable[str]) -> tuple[str, ...]:
    """Nodes with a possibly directed path into ``targets`` (reflexive).

    An edge ``u *-* v`` may be walked from ``u`` towards ``v`` unless the
    mark at ``u`` is an arrowhead.
    """
    m = g.matrix
    seen = set()
    queue = deque()
    for t in targets:
        i = g.index(t)
        if i not in seen:
            seen.add(i)
            queue.append(i)
    while queue:
        v = queue.popleft()
        for u in g._nbrs[v]:
            if u not in seen and m[v, u] != Mark.ARROW:
                seen.add(u)
                queue.append(u)
    return g._names(seen)


def validate_path(g: MixedGraph, path: Sequence[str]) -> None:
    if len(path) < 2:
        raise GraphError("a path needs at least one edge")
    if len(set(path)) != len(path):
        raise GraphError(f"path repeats a node: {list(path)}")
    for a, b in zip(path, path[1:]):
        if not g.is_adjacent(a, b):
            raise GraphError(f"{a!r} and {b!r} are not adjacent")


def classify_triple(g: MixedGraph, path: Sequence[str], i: int) -> TripleStatus:
    """Collider status of the ``i``-th node of ``path`` (interior only)."""
    if not 0 < i < len(path) - 1:
        raise GraphError(f"index {i} is not interior on a path of {len(path)} nodes")
    validate_path(g, path)
    a, b, c = path[i - 1], path[i], path[i + 1]
    left, right = g.mark(a, b), g.mark(c, b)
    if left == Mark.ARROW and right == Mark.ARROW:
        return TripleStatus.COLLIDER
    if left == Mark.TAIL or right == Mark.TAIL:
        return TripleStatus.DEFINITE_NON_COLLIDER
    if left == Mark.CIRCLE and right == Mark.CIRCLE and not g.is_adjacent(a, c):
        return TripleStatus.DEFINITE_NON_COLLIDER
    return TripleStatus.UNCERTAIN


# -- kind checks ------------------------------------------------------------


@dataclass(frozen=True)
class KindVerdict:
    valid: bool
    reason: str = ""
    witness: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.valid


def find_directed_cycle(g: MixedGraph) -> tuple[str, ...] | None:
    """A directed cycle ``(v0, ..., vk, v0)`` or None."""
    m = g.matrix
    n = len(g)
    children = [[j for j in g._nbrs[i] if m[i, j] == Mark.ARROW and m[j, i] == Mark.TAIL] for i in range(n)]
    color = [0] * n
    parent = [-1] * n
    for root in range(n):
        if color[root]:
            continue
        stack = [(root, iter(children[root]))]
        color[root] = 1
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[v] = 2
                stack.pop()
                continue
            if color[nxt] == 0:
                color[nxt] = 1
                parent[nxt] = v
                stack.append((nxt, iter(children[nxt])))
            elif color[nxt] == 1:
                cyc = [v]
                while cyc[-1] != nxt:
                    cyc.append(parent[cyc[-1]])
                cyc.reverse()
                return tuple(g.nodes[k] for k in cyc) + (g.nodes[nxt],)
    return None


def check_kind(g: MixedGraph, kind: GraphKind) -> KindVerdict:
    """Check the syntactic conditions of a DAG, MAG or PAG.

    Returns the first violation found; MAG maximality is verified through
    m-separation of every non-adjacent pair by its D-SEP set.
    """
    kind = GraphKind(kind)
    m = g.matrix
    if kind is GraphKind.PAG:
        return KindVerdict(True)
    for a, ma, mb, b in g.edges():
        if Mark.CIRCLE in (ma, mb):
            return KindVerdict(False, "circle mark", (a, b))
        if kind is GraphKind.DAG and (ma, mb) not in ((Mark.TAIL, Mark.ARROW), (Mark.ARROW, Mark.TAIL)):
            return KindVerdict(False, "non-directed edge", (a, b))
        if ma == Mark.TAIL and mb == Mark.TAIL:
            return KindVerdict(False, "undirected edge", (a, b))
    cycle = find_directed_cycle(g)
    if cycle is not None:
        return KindVerdict(False, "directed cycle", cycle)
    if kind is GraphKind.DAG:
        return KindVerdict(True)
    for a, ma, mb, b in g.edges():
        if ma == Mark.ARROW and mb == Mark.ARROW:
            if b in g.ancestors(a):
                return KindVerdict(False, "almost directed cycle", (a, b))
            if a in g.ancestors(b):
                return KindVerdict(False, "almost directed cycle", (b, a))
    from .separation import d_sep_set, _m_connected

    n = len(g)
    for i in range(n):
        for j in range(i + 1, n):
            if m[i, j]:
                continue
            x, y = g.nodes[i], g.nodes[j]
            z = d_sep_set(g, x, y, _checked=True)
            if _m_connected(g, x, y, z):
                return KindVerdict(False, "not maximal: non-adjacent pair cannot be separated", (x, y))
    return KindVerdict(True)


def is_ancestral(g: MixedGraph) -> bool:
    """No circles, no undirected edges, no directed or almost directed cycle."""
    if g.has_circles():
        return False
    for a, ma, mb, b in g.edges():
        if ma == Mark.TAIL and mb == Mark.TAIL:
            return False
    if find_directed_cycle(g) is not None:
        return False
    for a, ma, mb, b in g.edges():
        if ma == Mark.ARROW and mb == Mark.ARROW:
            if b in g.ancestors(a) or a in g.ancestors(b):
                return False
    return True


# -- text format -------------------------------------------------------------

_TOKENS = {
    "-->": (Mark.TAIL, Mark.ARROW),
    "<->": (Mark.ARROW, Mark.ARROW),
    "o->": (Mark.CIRCLE, Mark.ARROW),
    "o-o": (Mark.CIRCLE, Mark.CIRCLE),
    "<-o": (Mark.ARROW, Mark.CIRCLE),
}
_BY_MARKS = {v: k for k, v in _TOKENS.items()}


def format_edge(e: Edge) -> str:
    a, ma, mb, b = e
    tok = _BY_MARKS.get((ma, mb))
    if tok is not None:
        return f"{a} {tok} {b}"
    tok = _BY_MARKS.get((mb, ma))
    if tok is not None:
        return f"{b} {tok} {a}"
    raise GraphError(f"edge {a}-{b} with marks {ma.name}/{mb.name} has no text form")


def parse_graph(text: str) -> MixedGraph:
    """Parse the line-based text format (``nodes: ...`` then one edge per line)."""
    nodes = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if nodes is None:
            if parts[0] != "nodes:":
                raise GraphError(f"line {lineno}: expected 'nodes:' declaration first")
            nodes = parts[1:]
            continue
        if len(parts) != 3 or parts[1] not in _TOKENS:
            raise GraphError(f"line {lineno}: cannot parse edge {line!r}")
        ma, mb = _TOKENS[parts[1]]
        edges.append((parts[0], ma, mb, parts[2]))
    if nodes is None:
        raise GraphError("missing 'nodes:' declaration")
    return MixedGraph(nodes, edges)


def format_graph(g: MixedGraph) -> str:
    lines = ["nodes: " + " ".join(g.nodes)]
    lines.extend(format_edge(e) for e in g.edges())
    return "\n".join(lines) + "\n"


def read_graph(path) -> MixedGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def write_graph(g: MixedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_graph(g))


_LEFT = {Mark.TAIL: "-", Mark.ARROW: "<", Mark.CIRCLE: "o"}
_RIGHT = {Mark.TAIL: "-", Mark.ARROW: ">", Mark.CIRCLE: "o"}


def format_path(g: MixedGraph, path: Sequence[str]) -> str:
    """Render a path with its edge marks, e.g. ``S --> W <-- U --> Y``."""
    validate_path(g, path)
    out = [path[0]]
    for a, b in zip(path[:-1], path[1:]):
        out.append(_LEFT[g.mark(b, a)] + "-" + _RIGHT[g.mark(a, b)])
        out.append(b)
    return " ".join(out)
