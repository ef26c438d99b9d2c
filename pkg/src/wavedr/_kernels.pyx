# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairwise kernel sums.

Every routine sums over data points in index order so results match the
pure-Python fallback in ``_kernels_py`` to the last bit for Haar, and to
rounding for the other kernels.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, fabs

cnp.import_array()


cdef inline double _phi_table(const double[::1] table, double scale,
                              int support, double x) noexcept nogil:
    cdef double xs
    cdef Py_ssize_t i, last
    if x < 0.0 or x >= support:
        return 0.0
    xs = x * scale
    i = <Py_ssize_t>floor(xs)
    last = table.shape[0] - 1
    if i >= last:
        return table[last]
    return table[i] + (table[i + 1] - table[i]) * (xs - i)


def phi_values(const double[::1] table, double scale, int support,
               const double[::1] x):
    """Interpolate the dyadic table of a scaling function at ``x``."""
    cdef Py_ssize_t i, n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _phi_table(table, scale, support, x[i])
    return out


cdef inline double _table_kernel(const double[::1] table, double scale,
                                 int support, double a, double b) noexcept nogil:
    # K(a, b) = sum_m phi(a - m) phi(b - m), m over the window of b
    cdef double acc = 0.0, pb
    cdef double fb = floor(b)
    cdef int s
    cdef double m
    for s in range(support):
        m = fb - support + 1 + s
        pb = _phi_table(table, scale, support, b - m)
        acc = acc + pb * _phi_table(table, scale, support, a - m)
    return acc


def wavelet_moments(const double[::1] query, const double[::1] u,
                    const double[:, ::1] x, const double[::1] table,
                    double scale, int support, bint haar):
    """Direct sums s0[q] = sum_k K(query_q, u_k), s1[q] = sum_k K(.) x_k.

    ``query`` and ``u`` are already multiplied by 2**j_n.
    """
    cdef Py_ssize_t nq = query.shape[0], n = u.shape[0], d = x.shape[1]
    cdef Py_ssize_t q, k, c
    cdef double kv, a, b
    s0 = np.zeros(nq)
    s1 = np.zeros((nq, d))
    cdef double[::1] z0 = s0
    cdef double[:, ::1] z1 = s1
    with nogil:
        for q in range(nq):
            a = query[q]
            for k in range(n):
                b = u[k]
                if haar:
                    kv = 1.0 if floor(a) == floor(b) else 0.0
                elif fabs(a - b) >= support:
                    kv = 0.0
                else:
                    kv = _table_kernel(table, scale, support, a, b)
                z0[q] = z0[q] + kv
                for c in range(d):
                    z1[q, c] = z1[q, c] + kv * x[k, c]
    return s0, s1


def haar_moments_bucketed(const double[::1] query, const double[::1] u,
                          const double[:, ::1] x):
    """Haar sums via cell bucketing; bit-identical to ``wavelet_moments``."""
    cdef Py_ssize_t nq = query.shape[0], n = u.shape[0], d = x.shape[1]
    cdef Py_ssize_t q, k, c, i, ncell
    order = np.argsort(np.floor(np.asarray(u)), kind="stable")
    cells = np.floor(np.asarray(u))[order]
    uniq, starts = np.unique(cells, return_index=True)
    ncell = uniq.shape[0]
    ends = np.append(starts[1:], n)
    c0 = np.zeros(ncell)
    c1 = np.zeros((ncell, d))
    cdef long[::1] od = order.astype(np.int_)
    cdef long[::1] st = starts.astype(np.int_)
    cdef long[::1] en = ends.astype(np.int_)
    cdef double[::1] w0 = c0
    cdef double[:, ::1] w1 = c1
    with nogil:
        for i in range(ncell):
            for q in range(st[i], en[i]):
                k = od[q]
                w0[i] = w0[i] + 1.0
                for c in range(d):
                    w1[i, c] = w1[i, c] + x[k, c]
    pos = np.searchsorted(uniq, np.floor(np.asarray(query)))
    pos_c = np.minimum(pos, max(ncell - 1, 0))
    hit = (pos < ncell) & (uniq[pos_c] == np.floor(np.asarray(query)))
    s0 = np.where(hit, c0[pos_c], 0.0)
    s1 = np.where(hit[:, None], c1[pos_c], 0.0)
    return s0, s1


def quartic_moments(const double[::1] query, const double[::1] y,
                    const double[:, ::1] x, double h):
    """Direct sums of the biweight kernel K((query_q - y_k) / h)."""
    cdef Py_ssize_t nq = query.shape[0], n = y.shape[0], d = x.shape[1]
    cdef Py_ssize_t q, k, c
    cdef double t, w, kv
    s0 = np.zeros(nq)
    s1 = np.zeros((nq, d))
    cdef double[::1] z0 = s0
    cdef double[:, ::1] z1 = s1
    with nogil:
        for q in range(nq):
            for k in range(n):
                t = (query[q] - y[k]) / h
                if t < -1.0 or t > 1.0:
                    continue
                w = 1.0 - t * t
                kv = 0.9375 * w * w
                z0[q] = z0[q] + kv
                for c in range(d):
                    z1[q, c] = z1[q, c] + kv * x[k, c]
    return s0, s1
