# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels (see ``_pykernels`` for semantics)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()

cdef double ENTROPY_FLOOR = 1e-300


def project_simplex(v):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t n = vv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u = np.sort(vv)[::-1].copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double css = 0.0, theta = 0.0, t
    cdef Py_ssize_t i
    for i in range(n):
        css += u[i]
        t = (css - 1.0) / (i + 1)
        if u[i] - t > 0:
            theta = t
    for i in range(n):
        t = vv[i] - theta
        out[i] = t if t > 0.0 else 0.0
    return out


def entropy_step(x, s):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xx = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ss = np.ascontiguousarray(s, dtype=np.float64)
    cdef Py_ssize_t n = xx.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double zmax = -1e308, tot = 0.0, xi
    cdef Py_ssize_t i
    for i in range(n):
        xi = xx[i]
        if xi < ENTROPY_FLOOR:
            xi = ENTROPY_FLOOR
        out[i] = log(xi) - ss[i]
        if out[i] > zmax:
            zmax = out[i]
    for i in range(n):
        out[i] = exp(out[i] - zmax)
        tot += out[i]
    for i in range(n):
        out[i] /= tot
        if out[i] < ENTROPY_FLOOR:
            out[i] = ENTROPY_FLOOR
    return out


def nesterov_skokov(x):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xx = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xx.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g = np.zeros(n, dtype=np.float64)
    cdef double f = 0.25 * (xx[0] - 1.0) * (xx[0] - 1.0)
    cdef double r
    cdef Py_ssize_t i
    g[0] = 0.5 * (xx[0] - 1.0)
    for i in range(n - 1):
        r = xx[i + 1] - 2.0 * xx[i] * xx[i] + 1.0
        f += r * r
        g[i + 1] += 2.0 * r
        g[i] -= 8.0 * r * xx[i]
    return f, g


def chain_quadratic(x, Py_ssize_t m, double scale, double lin):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xx = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xx.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g = np.zeros(n, dtype=np.float64)
    cdef double f = scale * (xx[0] * xx[0] + xx[m - 1] * xx[m - 1]) - lin * xx[0]
    cdef double d
    cdef Py_ssize_t i
    g[0] += 2.0 * scale * xx[0] - lin
    g[m - 1] += 2.0 * scale * xx[m - 1]
    for i in range(m - 1):
        d = xx[i] - xx[i + 1]
        f += scale * d * d
        g[i] += 2.0 * scale * d
        g[i + 1] -= 2.0 * scale * d
    return f, g
