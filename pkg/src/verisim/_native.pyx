# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: LPT makespan and the weighted best-split scan.

Semantics and tie-breaking mirror verisim._fallback exactly; only speed
differs.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "native"


def lpt_makespan(times, int p):
    """Makespan of greedy longest-processing-time-first scheduling on p processors."""
    if p < 1:
        raise ValueError("processor count must be >= 1")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] arr = np.ascontiguousarray(times, dtype=np.float64)
    cdef Py_ssize_t n = arr.shape[0]
    if n == 0:
        return 0.0
    cdef Py_ssize_t i, j, best
    if p == 1:
        # numpy's pairwise summation, bit-identical to the fallback backend
        return float(np.sum(arr))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] order = np.sort(arr)[::-1].copy()
    if p >= n:
        return order[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] loads = np.zeros(p, dtype=np.float64)
    cdef double best_load, makespan
    for i in range(n):
        best = 0
        best_load = loads[0]
        for j in range(1, p):
            if loads[j] < best_load:
                best_load = loads[j]
                best = j
        loads[best] = best_load + order[i]
    makespan = loads[0]
    for j in range(1, p):
        if loads[j] > makespan:
            makespan = loads[j]
    return makespan


def best_split(x, y, w, Py_ssize_t lo, Py_ssize_t hi):
    """Best variance-reduction split of [lo, hi); see verisim._fallback.best_split."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xa = x
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ya = y
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wa = w
    cdef Py_ssize_t m = hi - lo
    if m < 2:
        return -1, 0.0
    cdef double w_tot = 0.0, s_tot = 0.0
    cdef Py_ssize_t i
    for i in range(lo, hi):
        w_tot += wa[i]
        s_tot += wa[i] * ya[i]
    if w_tot <= 0.0:
        return -1, 0.0
    cdef double base = s_tot * s_tot / w_tot
    cdef double w_left = 0.0, s_left = 0.0, w_right, s_right, gain
    cdef double best_gain = 0.0
    cdef Py_ssize_t best_pos = -1
    for i in range(lo, hi - 1):
        w_left += wa[i]
        s_left += wa[i] * ya[i]
        if xa[i + 1] <= xa[i]:
            continue
        w_right = w_tot - w_left
        if w_left <= 0.0 or w_right <= 0.0:
            continue
        s_right = s_tot - s_left
        gain = s_left * s_left / w_left + s_right * s_right / w_right - base
        if gain > best_gain:
            best_gain = gain
            best_pos = i + 1
    if best_pos < 0:
        return -1, 0.0
    return best_pos, best_gain
