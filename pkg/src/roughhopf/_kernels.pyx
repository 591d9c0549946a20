# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 kernels for polynomial vector fields."""
import numpy as np
cimport numpy as cnp
from libc.math cimport isfinite

cnp.import_array()


cdef void _field(const cnp.int64_t[:, :] E, const double[:, :] C, double* x,
                 double* out, double* mon, Py_ssize_t m, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t r, j, p
    cdef double v
    for r in range(m):
        v = 1.0
        for j in range(d):
            for p in range(E[r, j]):
                v *= x[j]
        mon[r] = v
    for j in range(d):
        v = 0.0
        for r in range(m):
            v += mon[r] * C[r, j]
        out[j] = v


cdef bint _rk4(const cnp.int64_t[:, :] E, const double[:, :] C, double* x, int M,
               const double[:] lo, const double[:] hi, double* work, Py_ssize_t m,
               Py_ssize_t d) noexcept nogil:
    cdef double h = 1.0 / M
    cdef double* k1 = work
    cdef double* k2 = work + d
    cdef double* k3 = work + 2 * d
    cdef double* k4 = work + 3 * d
    cdef double* y = work + 4 * d
    cdef double* mon = work + 5 * d
    cdef int step
    cdef Py_ssize_t j
    for step in range(M):
        _field(E, C, x, k1, mon, m, d)
        for j in range(d):
            y[j] = x[j] + 0.5 * h * k1[j]
        _field(E, C, y, k2, mon, m, d)
        for j in range(d):
            y[j] = x[j] + 0.5 * h * k2[j]
        _field(E, C, y, k3, mon, m, d)
        for j in range(d):
            y[j] = x[j] + h * k3[j]
        _field(E, C, y, k4, mon, m, d)
        for j in range(d):
            x[j] = x[j] + (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
            if not isfinite(x[j]) or x[j] < lo[j] or x[j] > hi[j]:
                return False
    return True


def eval_field(E, C, x):
    cdef cnp.int64_t[:, :] Ev = np.ascontiguousarray(E, dtype=np.int64)
    cdef double[:, :] Cv = np.ascontiguousarray(C, dtype=np.float64)
    cdef double[:] xv = np.array(x, dtype=np.float64)
    cdef Py_ssize_t m = Ev.shape[0], d = Cv.shape[1]
    out = np.empty(d)
    cdef double[:] ov = out
    mon = np.empty(max(m, 1))
    cdef double[:] mv = mon
    _field(Ev, Cv, &xv[0], &ov[0], &mv[0], m, d)
    return out


def rk4_chain(E, Cs, x0, int M, lo, hi):
    cdef cnp.int64_t[:, :] Ev = np.ascontiguousarray(E, dtype=np.int64)
    cdef double[:, :, :] Cv = np.ascontiguousarray(Cs, dtype=np.float64)
    cdef double[:] lov = np.ascontiguousarray(lo, dtype=np.float64)
    cdef double[:] hiv = np.ascontiguousarray(hi, dtype=np.float64)
    cdef Py_ssize_t n = Cv.shape[0], m = Ev.shape[0], d = Cv.shape[2]
    states = np.full((n + 1, d), np.nan)
    cdef double[:, :] sv = states
    x = np.array(x0, dtype=np.float64)
    cdef double[:] xv = x
    work = np.empty(5 * d + max(m, 1))
    cdef double[:] wv = work
    cdef Py_ssize_t j, k
    cdef int status = -1
    for k in range(d):
        sv[0, k] = xv[k]
    with nogil:
        for j in range(n):
            if not _rk4(Ev, Cv[j], &xv[0], M, lov, hiv, &wv[0], m, d):
                status = <int>j
                for k in range(d):
                    sv[j + 1, k] = xv[k]
                break
            for k in range(d):
                sv[j + 1, k] = xv[k]
    return states, status


def rk4_many(E, Cs, X0, int M, lo, hi):
    cdef cnp.int64_t[:, :] Ev = np.ascontiguousarray(E, dtype=np.int64)
    cdef double[:, :, :] Cv = np.ascontiguousarray(Cs, dtype=np.float64)
    cdef double[:] lov = np.ascontiguousarray(lo, dtype=np.float64)
    cdef double[:] hiv = np.ascontiguousarray(hi, dtype=np.float64)
    out = np.array(X0, dtype=np.float64, order="C", copy=True)
    cdef double[:, :] ov = out
    cdef Py_ssize_t n = ov.shape[0], m = Ev.shape[0], d = ov.shape[1]
    status = np.full(n, -1, dtype=np.int64)
    cdef cnp.int64_t[:] stv = status
    work = np.empty(5 * d + max(m, 1))
    cdef double[:] wv = work
    cdef Py_ssize_t j
    with nogil:
        for j in range(n):
            if not _rk4(Ev, Cv[j], &ov[j, 0], M, lov, hiv, &wv[0], m, d):
                stv[j] = 0
    return out, status
