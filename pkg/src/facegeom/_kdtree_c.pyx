# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled KD-tree backend (hot kernel of the symmetry score).

Construction and tie-break semantics are identical to _kdtree_py.py: median
split over alternating axes ordered by (coordinate, payload, position), and
nearest queries that resolve distance ties toward the smallest payload.
"""

from libc.stdlib cimport free, malloc

import numpy as np

cimport numpy as cnp

BACKEND_NAME = "compiled"

cdef double INF = float("inf")


cdef class _Tree:
    cdef double[::1] xs
    cdef double[::1] ys
    cdef cnp.int64_t[::1] payloads
    cdef Py_ssize_t n
    cdef Py_ssize_t* pt
    cdef Py_ssize_t* left
    cdef Py_ssize_t* right
    cdef Py_ssize_t counter

    def __cinit__(self, Py_ssize_t n):
        self.n = n
        self.pt = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
        self.left = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
        self.right = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
        if n > 0 and (self.pt == NULL or self.left == NULL or self.right == NULL):
            raise MemoryError()
        self.counter = 0

    def __dealloc__(self):
        free(self.pt)
        free(self.left)
        free(self.right)


cdef inline bint _key_less(_Tree tree, Py_ssize_t i, Py_ssize_t j, int axis) nogil:
    cdef double ci = tree.xs[i] if axis == 0 else tree.ys[i]
    cdef double cj = tree.xs[j] if axis == 0 else tree.ys[j]
    if ci != cj:
        return ci < cj
    if tree.payloads[i] != tree.payloads[j]:
        return tree.payloads[i] < tree.payloads[j]
    return i < j


cdef void _sort_idx(_Tree tree, Py_ssize_t* idx, Py_ssize_t lo, Py_ssize_t hi, int axis) nogil:
    # quicksort with insertion-sort fallback; result is exact because the
    # (coordinate, payload, position) key is a strict total order
    cdef Py_ssize_t i, j, p, tmp, pivot
    while hi - lo > 16:
        p = lo + (hi - lo) // 2
        if _key_less(tree, idx[p], idx[lo], axis):
            tmp = idx[p]; idx[p] = idx[lo]; idx[lo] = tmp
        if _key_less(tree, idx[hi - 1], idx[lo], axis):
            tmp = idx[hi - 1]; idx[hi - 1] = idx[lo]; idx[lo] = tmp
        if _key_less(tree, idx[hi - 1], idx[p], axis):
            tmp = idx[hi - 1]; idx[hi - 1] = idx[p]; idx[p] = tmp
        pivot = idx[p]
        i = lo
        j = hi - 1
        while True:
            i += 1
            while _key_less(tree, idx[i], pivot, axis):
                i += 1
            j -= 1
            while _key_less(tree, pivot, idx[j], axis):
                j -= 1
            if i >= j:
                break
            tmp = idx[i]; idx[i] = idx[j]; idx[j] = tmp
        _sort_idx(tree, idx, j + 1, hi, axis)
        hi = j + 1
    for i in range(lo + 1, hi):
        tmp = idx[i]
        j = i
        while j > lo and _key_less(tree, tmp, idx[j - 1], axis):
            idx[j] = idx[j - 1]
            j -= 1
        idx[j] = tmp


cdef Py_ssize_t _build(_Tree tree, Py_ssize_t* idx, Py_ssize_t count, int depth) nogil:
    if count == 0:
        return -1
    cdef int axis = depth % 2
    _sort_idx(tree, idx, 0, count, axis)
    cdef Py_ssize_t mid = count // 2
    cdef Py_ssize_t node = tree.counter
    tree.counter += 1
    tree.pt[node] = idx[mid]
    tree.left[node] = _build(tree, idx, mid, depth + 1)
    tree.right[node] = _build(tree, idx + mid + 1, count - mid - 1, depth + 1)
    return node


def build(xs, ys, payloads):
    cdef Py_ssize_t n = len(xs)
    cdef _Tree tree = _Tree(n)
    tree.xs = np.ascontiguousarray(xs, dtype=np.float64)
    tree.ys = np.ascontiguousarray(ys, dtype=np.float64)
    tree.payloads = np.ascontiguousarray(payloads, dtype=np.int64)
    cdef Py_ssize_t* idx = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    if n > 0 and idx == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    for i in range(n):
        idx[i] = i
    _build(tree, idx, n, 0)
    free(idx)
    return tree


cdef void _visit(_Tree tree, Py_ssize_t node, int depth, double qx, double qy,
                 Py_ssize_t* best_pos, double* best_d2, cnp.int64_t* best_payload) nogil:
    if node == -1:
        return
    cdef Py_ssize_t pos = tree.pt[node]
    cdef double dx = qx - tree.xs[pos]
    cdef double dy = qy - tree.ys[pos]
    cdef double d2 = dx * dx + dy * dy
    cdef cnp.int64_t payload = tree.payloads[pos]
    if d2 < best_d2[0] or (
        d2 == best_d2[0]
        and (payload < best_payload[0] or (payload == best_payload[0] and pos < best_pos[0]))
    ):
        best_pos[0] = pos
        best_d2[0] = d2
        best_payload[0] = payload
    cdef double axis_delta = dx if depth % 2 == 0 else dy
    cdef Py_ssize_t near, far
    if axis_delta < 0:
        near = tree.left[node]
        far = tree.right[node]
    else:
        near = tree.right[node]
        far = tree.left[node]
    _visit(tree, near, depth + 1, qx, qy, best_pos, best_d2, best_payload)
    if axis_delta * axis_delta <= best_d2[0]:
        _visit(tree, far, depth + 1, qx, qy, best_pos, best_d2, best_payload)


def nearest(_Tree tree, double qx, double qy):
    """Return (position in input arrays, squared distance) of the nearest point."""
    cdef Py_ssize_t best_pos = -1
    cdef double best_d2 = INF
    cdef cnp.int64_t best_payload = 0
    if tree.n > 0:
        _visit(tree, 0, 0, qx, qy, &best_pos, &best_d2, &best_payload)
    return best_pos, best_d2


def nearest_batch(_Tree tree, qxs, qys):
    cdef double[::1] qx = np.ascontiguousarray(qxs, dtype=np.float64)
    cdef double[::1] qy = np.ascontiguousarray(qys, dtype=np.float64)
    cdef Py_ssize_t m = qx.shape[0]
    positions_arr = np.empty(m, dtype=np.int64)
    d2s_arr = np.empty(m, dtype=np.float64)
    cdef cnp.int64_t[::1] positions = positions_arr
    cdef double[::1] d2s = d2s_arr
    cdef Py_ssize_t i, best_pos
    cdef double best_d2
    cdef cnp.int64_t best_payload
    with nogil:
        for i in range(m):
            best_pos = -1
            best_d2 = INF
            best_payload = 0
            if tree.n > 0:
                _visit(tree, 0, 0, qx[i], qy[i], &best_pos, &best_d2, &best_payload)
            positions[i] = best_pos
            d2s[i] = best_d2
    return positions_arr, d2s_arr
