# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled one-sided exponential-kernel recurrences.

These are the hot inner loops of every convolution with exp(-|x - y|):
a forward pass accumulating mass to the left of each node and a backward
pass accumulating mass to the right, each O(N) and inherently sequential.
A numpy fallback with identical semantics lives in ``_kernels_py``.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


cdef inline void _pwl_weights(double h, double* c0, double* c1) nogil:
    """Exact weights for a linear segment integrated against exp(-decay).

    c1 multiplies the node nearest the evaluation point, c0 the far node:
        int_0^h exp(-(h - t)) * linear(t) dt = c0 * f_far + c1 * f_near.
    The closed forms cancel catastrophically for small h, so a truncated
    series takes over below h = 0.1 (relative error < 1e-15 either way).
    """
    cdef double eh
    if h < 0.1:
        c0[0] = h * (0.5 + h * (-1.0 / 3.0 + h * (0.125 + h * (-1.0 / 30.0
                 + h * (1.0 / 144.0 + h * (-1.0 / 840.0 + h * (1.0 / 5760.0
                 + h * (-1.0 / 45360.0 + h * (1.0 / 403200.0)))))))))
        c1[0] = h * (0.5 + h * (-1.0 / 6.0 + h * (1.0 / 24.0 + h * (-1.0 / 120.0
                 + h * (1.0 / 720.0 + h * (-1.0 / 5040.0 + h * (1.0 / 40320.0
                 + h * (-1.0 / 362880.0 + h * (1.0 / 3628800.0)))))))))
    else:
        eh = exp(-h)
        c0[0] = (1.0 - (1.0 + h) * eh) / h
        c1[0] = (h - 1.0 + eh) / h


def pwl_weights(double h):
    """Expose the segment weights (far, near); shared with test oracles."""
    cdef double c0 = 0.0, c1 = 0.0
    _pwl_weights(h, &c0, &c1)
    return c0, c1


def pwl_passes(double[::1] xs, double[::1] f):
    """One-sided integrals of a piecewise-linear integrand on increasing xs.

    Returns (jminus, jplus):
        jminus[i] = int_{xs[0]}^{xs[i]} exp(-(xs[i] - y)) f(y) dy
        jplus[i]  = int_{xs[i]}^{xs[-1]} exp(-(y - xs[i])) f(y) dy
    """
    cdef Py_ssize_t n = xs.shape[0]
    jm_arr = np.zeros(n, dtype=np.float64)
    jp_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] jm = jm_arr
    cdef double[::1] jp = jp_arr
    cdef Py_ssize_t i
    cdef double h, c0, c1
    with nogil:
        for i in range(1, n):
            h = xs[i] - xs[i - 1]
            _pwl_weights(h, &c0, &c1)
            jm[i] = exp(-h) * jm[i - 1] + c0 * f[i - 1] + c1 * f[i]
        for i in range(n - 2, -1, -1):
            h = xs[i + 1] - xs[i]
            _pwl_weights(h, &c0, &c1)
            jp[i] = exp(-h) * jp[i + 1] + c1 * f[i] + c0 * f[i + 1]
    return jm_arr, jp_arr


def pwl_passes_uniform(double h, double[::1] f):
    """Uniform-spacing variant of ``pwl_passes`` (weights hoisted)."""
    cdef Py_ssize_t n = f.shape[0]
    jm_arr = np.zeros(n, dtype=np.float64)
    jp_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] jm = jm_arr
    cdef double[::1] jp = jp_arr
    cdef Py_ssize_t i
    cdef double c0 = 0.0, c1 = 0.0, a
    _pwl_weights(h, &c0, &c1)
    a = exp(-h)
    with nogil:
        for i in range(1, n):
            jm[i] = a * jm[i - 1] + c0 * f[i - 1] + c1 * f[i]
        for i in range(n - 2, -1, -1):
            jp[i] = a * jp[i + 1] + c1 * f[i] + c0 * f[i + 1]
    return jm_arr, jp_arr


def point_mass_passes(double[::1] s, double[::1] w):
    """One-sided kernel sums of point masses w at nondecreasing positions s.

    Returns (jminus, jplus):
        jminus[i] = sum_{j < i} exp(-(s[i] - s[j])) w[j]
        jplus[i]  = sum_{j > i} exp(-(s[j] - s[i])) w[j]
    Zero-length gaps decay by exp(0) = 1, so plateaus keep full weight.
    """
    cdef Py_ssize_t n = s.shape[0]
    jm_arr = np.zeros(n, dtype=np.float64)
    jp_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] jm = jm_arr
    cdef double[::1] jp = jp_arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(1, n):
            jm[i] = exp(-(s[i] - s[i - 1])) * (jm[i - 1] + w[i - 1])
        for i in range(n - 2, -1, -1):
            jp[i] = exp(-(s[i + 1] - s[i])) * (jp[i + 1] + w[i + 1])
    return jm_arr, jp_arr
