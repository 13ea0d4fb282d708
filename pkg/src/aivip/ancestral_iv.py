"""IV validity in DAGs and conditioning-set discovery in MAGs and PAGs.

``manipulate`` turns the treatment edge into ``W <-> Y`` and drops the
``S``-``Y`` edge; the conditioning set is then D-SEP(S, Y) in a manipulated
MAG, or the possible ancestors of {S, Y} in a manipulated PAG, with W, S and
Y themselves removed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .graph import GraphError, GraphKind, Mark, MixedGraph, check_kind, possible_ancestors
from .projection import is_definitely_visible, is_visible
from .separation import _m_connected, d_sep_set, d_separated


class VisibleEdgeError(GraphError):
    """The treatment edge is (definitely) visible: IV machinery does not apply."""


@dataclass(frozen=True)
class IvRoles:
    w: str
    y: str
    s: str

    def __post_init__(self):
        if len({self.w, self.y, self.s}) != 3:
            raise GraphError(f"treatment, outcome and instrument must be distinct: {self}")

    def check(self, g: MixedGraph) -> None:
        for v in (self.w, self.y, self.s):
            if v not in g:
                raise GraphError(f"role node {v!r} not in graph")


def _check_z(g: MixedGraph, roles: IvRoles, z: Iterable[str], latent: Iterable[str] = ()) -> tuple[str, ...]:
    z = tuple(z)
    bad = {roles.w, roles.y, roles.s}.intersection(z)
    if bad:
        raise GraphError(f"conditioning set may not contain {sorted(bad)}")
    lat = set(latent)
    for v in z:
        g.index(v)
        if v in lat:
            raise GraphError(f"conditioning set contains latent node {v!r}")
    return z


def _require_dag(g: MixedGraph) -> None:
    verdict = check_kind(g, GraphKind.DAG)
    if not verdict:
        raise GraphError(f"expected a DAG: {verdict.reason}")


def _cut_treatment(g: MixedGraph, roles: IvRoles) -> MixedGraph:
    # G with W -> Y removed
    if g.edge(roles.w, roles.y) != (Mark.TAIL, Mark.ARROW):
        raise GraphError(f"graph has no edge {roles.w} -> {roles.y}")
    return g.without_edge(roles.w, roles.y)


def is_standard_iv(g: MixedGraph, roles: IvRoles) -> bool:
    """Cause of W, affecting Y only through W, sharing no cause with Y.

    Exclusion and exogeneity are checked as path conditions (every directed
    S -> Y path meets W; no proper ancestor of S reaches Y avoiding S) and
    jointly as d-separation of S and Y given nothing once W -> Y is cut.
    """
    roles.check(g)
    _require_dag(g)
    w, y, s = roles.w, roles.y, roles.s
    if s not in g.ancestors(w):
        return False
    without_w = g.subgraph(v for v in g.nodes if v != w)
    if y in without_w.descendants(s):
        return False
    without_s = g.subgraph(v for v in g.nodes if v != s)
    if (set(g.ancestors(s)) - {s}) & set(without_s.ancestors(y)):
        return False
    return d_separated(_cut_treatment(g, roles), s, y).separated


def is_conditional_iv(g: MixedGraph, roles: IvRoles, z: Iterable[str], latent: Iterable[str] = ()) -> bool:
    roles.check(g)
    _require_dag(g)
    z = _check_z(g, roles, z, latent)
    if d_separated(g, roles.s, roles.w, z).separated:
        return False
    if not d_separated(_cut_treatment(g, roles), roles.s, roles.y, z).separated:
        return False
    return not set(z) & set(g.descendants(roles.y))


def is_ancestral_iv_dag(g: MixedGraph, roles: IvRoles, z: Iterable[str], latent: Iterable[str] = ()) -> bool:
    """Conditional IV whose conditioning set lies in An(Y) | An(S)."""
    z = tuple(z)
    if not is_conditional_iv(g, roles, z, latent):
        return False
    allowed = set(g.ancestors((roles.y, roles.s)))
    return set(z) <= allowed


def manipulate(g: MixedGraph, roles: IvRoles) -> MixedGraph:
    """Replace the treatment edge by ``W <-> Y`` and drop the ``S``-``Y`` edge.

    The treatment edge may carry a tail or circle at W and an arrowhead or
    circle at Y. Directed edges are rejected when visible (MAG) or definitely
    visible (PAG).
    """
    roles.check(g)
    w, y, s = roles.w, roles.y, roles.s
    e = g.edge(w, y)
    if e is None:
        raise GraphError(f"no edge between treatment {w!r} and outcome {y!r}")
    mw, my = e
    if mw == Mark.ARROW or my == Mark.TAIL:
        raise GraphError(f"edge {w}-{y} does not allow {w} to cause {y}")
    if (mw, my) == (Mark.TAIL, Mark.ARROW):
        if g.has_circles():
            visible = is_definitely_visible(g, w, y)
        else:
            visible = is_visible(g, w, y)
        if visible:
            raise VisibleEdgeError("visible edge: back-door adjustment applies, IV machinery not licensed")
    out = g.with_edge(w, Mark.ARROW, Mark.ARROW, y)
    if out.is_adjacent(s, y):
        out = out.without_edge(s, y)
    return out


def conditioning_set_mag(m: MixedGraph, roles: IvRoles) -> tuple[str, ...]:
    """D-SEP(S, Y) in the manipulated MAG, without W and S."""
    if m.has_circles():
        raise GraphError("conditioning_set_mag needs a MAG; use conditioning_set_pag")
    mm = manipulate(m, roles)
    dsep = d_sep_set(mm, roles.s, roles.y)
    return tuple(v for v in dsep if v not in (roles.w, roles.s, roles.y))


def conditioning_set_pag(p: MixedGraph, roles: IvRoles) -> tuple[str, ...]:
    """Possible ancestors of {S, Y} in the manipulated PAG, without W, S, Y."""
    if roles.s not in p:
        raise GraphError(f"instrument {roles.s!r} not in PAG")
    mp = manipulate(p, roles)
    poss = possible_ancestors(mp, (roles.s, roles.y))
    return tuple(v for v in poss if v not in (roles.w, roles.s, roles.y))


def instrumentalizes_mag(m: MixedGraph, roles: IvRoles, z: Iterable[str]) -> bool:
    """S and W m-connected given Z in ``m``; S and Y m-separated given Z
    once ``m`` is manipulated."""
    z = tuple(z)
    if not _m_connected(m, roles.s, roles.w, z):
        return False
    mm = manipulate(m, roles)
    return not _m_connected(mm, roles.s, roles.y, z)
