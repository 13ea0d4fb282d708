# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_core_py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, NAN
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef enum:
    TAIL = 1
    ARROW = 2

cdef double PIVOT_TOL = 1e-10


cdef inline Py_ssize_t* _alloc(Py_ssize_t n) noexcept nogil:
    return <Py_ssize_t*> malloc((n + 1) * sizeof(Py_ssize_t))


def ancestor_mask(const signed char[:, :] marks, seeds):
    cdef Py_ssize_t n = marks.shape[0]
    cdef cnp.uint8_t[:] sd = np.ascontiguousarray(seeds, dtype=np.uint8)
    out = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[:] o = out
    _ancestors(marks, sd, o)
    return out


cdef void _ancestors(const signed char[:, :] marks, cnp.uint8_t[:] seeds,
                     cnp.uint8_t[:] out) noexcept nogil:
    cdef Py_ssize_t n = marks.shape[0]
    cdef Py_ssize_t top = 0, i, u, v
    cdef Py_ssize_t* stack = <Py_ssize_t*> _alloc(n)
    for i in range(n):
        out[i] = 0
    for i in range(n):
        if seeds[i]:
            out[i] = 1
            stack[top] = i
            top += 1
    while top > 0:
        top -= 1
        v = stack[top]
        for u in range(n):
            if not out[u] and marks[u, v] == ARROW and marks[v, u] == TAIL:
                out[u] = 1
                stack[top] = u
                top += 1
    free(stack)


def m_connected(const signed char[:, :] marks, Py_ssize_t x, Py_ssize_t y, zmask):
    cdef Py_ssize_t n = marks.shape[0]
    cdef cnp.uint8_t[:] z = np.ascontiguousarray(zmask, dtype=np.uint8)
    anz_arr = np.zeros(n, dtype=np.uint8)
    seen_arr = np.zeros(2 * n, dtype=np.uint8)
    cdef cnp.uint8_t[:] anz = anz_arr
    cdef cnp.uint8_t[:] seen = seen_arr
    cdef bint found
    with nogil:
        _ancestors(marks, z, anz)
        found = _reach(marks, x, y, z, anz, seen)
    return bool(found)


cdef bint _reach(const signed char[:, :] marks, Py_ssize_t x, Py_ssize_t y,
                 cnp.uint8_t[:] z, cnp.uint8_t[:] anz,
                 cnp.uint8_t[:] seen) noexcept nogil:
    cdef Py_ssize_t n = marks.shape[0]
    cdef Py_ssize_t head = 0, tail = 0, c, v, state, into, nxt
    cdef Py_ssize_t* queue = _alloc(2 * n)
    cdef bint found = False
    for c in range(n):
        if marks[x, c] == 0:
            continue
        if c == y:
            found = True
            break
        into = 1 if marks[x, c] == ARROW else 0
        state = 2 * c + into
        if not seen[state]:
            seen[state] = 1
            queue[tail] = state
            tail += 1
    while not found and head < tail:
        state = queue[head]
        head += 1
        v = state // 2
        into = state % 2
        for c in range(n):
            if marks[v, c] == 0:
                continue
            if into and marks[c, v] == ARROW:
                if not anz[v]:
                    continue
            elif z[v]:
                continue
            if c == y:
                found = True
                break
            nxt = 2 * c + (1 if marks[v, c] == ARROW else 0)
            if not seen[nxt]:
                seen[nxt] = 1
                queue[tail] = nxt
                tail += 1
    free(queue)
    return found


def partial_corr(const double[:, :] corr, idx):
    cdef cnp.intp_t[:] ix = np.ascontiguousarray(idx, dtype=np.intp)
    cdef Py_ssize_t m = ix.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double acc, b, c, rest
    low_arr = np.zeros((m, m), dtype=np.float64)
    order_arr = np.empty(m, dtype=np.intp)
    cdef double[:, :] low = low_arr
    cdef cnp.intp_t[:] order = order_arr
    for i in range(m - 2):
        order[i] = ix[i + 2]
    order[m - 2] = ix[0]
    order[m - 1] = ix[1]
    for i in range(m):
        for j in range(i + 1):
            acc = corr[order[i], order[j]]
            for k in range(j):
                acc -= low[i, k] * low[j, k]
            if i == j:
                if acc < -PIVOT_TOL:
                    return NAN
                low[i, i] = sqrt(acc) if acc > 0.0 else 0.0
            elif low[j, j] > 0.0:
                low[i, j] = acc / low[j, j]
            else:
                low[i, j] = 0.0
    for i in range(m - 1):
        if not low[i, i] * low[i, i] > PIVOT_TOL:
            return NAN
    b = low[m - 1, m - 2]
    c = low[m - 1, m - 1]
    rest = b * b + c * c
    if not rest > PIVOT_TOL:
        return NAN
    return b / sqrt(rest)
