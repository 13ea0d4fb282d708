"""Pure-Python versions of the hot kernels.

Every function here has a compiled twin in ``_core.pyx`` with the same
signature. ``aivip.kernels`` picks one of the two at import time.

Graphs are passed as square ``int8`` mark matrices where ``marks[i, j]`` is
the mark at ``j`` on the edge between ``i`` and ``j`` (0 means no edge,
1 tail, 2 arrowhead, 3 circle).
"""

from collections import deque
from math import sqrt

import numpy as np

TAIL = 1
ARROW = 2
PIVOT_TOL = 1e-10


def ancestor_mask(marks, seeds):
    """Reflexive ancestor closure of the nodes flagged in ``seeds``."""
    marks = np.asarray(marks)
    n = marks.shape[0]
    out = np.zeros(n, dtype=np.uint8)
    stack = [i for i in range(n) if seeds[i]]
    for i in stack:
        out[i] = 1
    while stack:
        v = stack.pop()
        for u in range(n):
            # u -> v
            if not out[u] and marks[u, v] == ARROW and marks[v, u] == TAIL:
                out[u] = 1
                stack.append(u)
    return out


def m_connected(marks, x, y, zmask):
    """True when ``x`` and ``y`` are m-connected given the nodes in ``zmask``.

    Reachability over (node, entered-through-arrowhead) states; a collider is
    passable when it is an ancestor of the conditioning set, a non-collider
    when it is outside it.
    """
    marks = np.asarray(marks)
    n = marks.shape[0]
    anz = ancestor_mask(marks, zmask)
    nbrs = [np.flatnonzero(marks[v]) for v in range(n)]
    seen = np.zeros((n, 2), dtype=bool)
    queue = deque()
    for c in nbrs[x]:
        into = int(marks[x, c] == ARROW)
        if c == y:
            return True
        if not seen[c, into]:
            seen[c, into] = True
            queue.append((c, into))
    while queue:
        v, into = queue.popleft()
        for c in nbrs[v]:
            if into and marks[c, v] == ARROW:
                if not anz[v]:
                    continue
            elif zmask[v]:
                continue
            if c == y:
                return True
            nxt = int(marks[v, c] == ARROW)
            if not seen[c, nxt]:
                seen[c, nxt] = True
                queue.append((c, nxt))
    return False


def partial_corr(corr, idx):
    """Partial correlation of ``idx[0]`` and ``idx[1]`` given ``idx[2:]``.

    Cholesky factor of the submatrix ordered (given..., i, j); the trailing
    2x2 block holds the residual covariance. NaN when the conditioning
    columns or either tested column are degenerate; exact collinearity of the
    two tested columns alone gives +-1.
    """
    corr = np.asarray(corr, dtype=float)
    idx = np.asarray(idx, dtype=np.intp)
    order = np.concatenate([idx[2:], idx[:2]])
    sub = corr[np.ix_(order, order)]
    low = _cholesky(sub)
    if low is None:
        return float("nan")
    piv = np.diag(low)[:-1] ** 2
    b = low[-1, -2]
    c = low[-1, -1]
    rest = b * b + c * c
    if not (np.all(piv > PIVOT_TOL) and rest > PIVOT_TOL):
        return float("nan")
    return float(b / sqrt(rest))


def _cholesky(a):
    # tolerant of a zero final pivot, which numpy's cholesky rejects
    m = a.shape[0]
    low = np.zeros_like(a)
    for i in range(m):
        for j in range(i + 1):
            acc = a[i, j] - low[i, :j] @ low[j, :j]
            if i == j:
                if acc < -PIVOT_TOL:
                    return None
                low[i, i] = sqrt(max(acc, 0.0))
            elif low[j, j] > 0.0:
                low[i, j] = acc / low[j, j]
            else:
                low[i, j] = 0.0
    return low
