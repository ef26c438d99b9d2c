"""Pure-numpy fallback for the compiled kernels in ``_kernels.pyx``.

Same signatures and the same summation order over data points, so Haar
results are bit-identical across backends.
"""
import numpy as np


def _phi_table(table, scale, support, x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x >= 0.0) & (x < support)
    xs = x[inside] * scale
    i = np.floor(xs).astype(np.int64)
    last = table.shape[0] - 1
    top = i >= last
    i = np.minimum(i, last - 1)
    v = table[i] + (table[i + 1] - table[i]) * (xs - i)
    v[top] = table[last]
    out[inside] = v
    return out


def phi_values(table, scale, support, x):
    return _phi_table(table, scale, support, np.ascontiguousarray(x, dtype=float))


def wavelet_moments(query, u, x, table, scale, support, haar):
    query = np.asarray(query, dtype=float)
    nq, d = query.shape[0], x.shape[1]
    s0 = np.zeros(nq)
    s1 = np.zeros((nq, d))
    qcell = np.floor(query)
    for k in range(u.shape[0]):
        b = u[k]
        if haar:
            kv = (qcell == np.floor(b)).astype(float)
        else:
            kv = np.zeros(nq)
            fb = np.floor(b)
            for s in range(support):
                m = fb - support + 1 + s
                pb = _phi_table(table, scale, support, np.array([b - m]))[0]
                kv = kv + pb * _phi_table(table, scale, support, query - m)
            kv[np.abs(query - b) >= support] = 0.0
        s0 += kv
        s1 += kv[:, None] * x[k]
    return s0, s1


def haar_moments_bucketed(query, u, x):
    query = np.asarray(query, dtype=float)
    n, d = x.shape
    cells = np.floor(u)
    uniq, inverse = np.unique(cells, return_inverse=True)
    c0 = np.zeros(uniq.shape[0])
    c1 = np.zeros((uniq.shape[0], d))
    # np.add.at accumulates unbuffered in index order
    np.add.at(c0, inverse, 1.0)
    np.add.at(c1, inverse, x)
    qc = np.floor(query)
    pos = np.searchsorted(uniq, qc)
    pos_c = np.minimum(pos, max(uniq.shape[0] - 1, 0))
    hit = (pos < uniq.shape[0]) & (uniq[pos_c] == qc)
    s0 = np.where(hit, c0[pos_c], 0.0)
    s1 = np.where(hit[:, None], c1[pos_c], 0.0)
    return s0, s1


def quartic_moments(query, y, x, h):
    query = np.asarray(query, dtype=float)
    t = (query[:, None] - y[None, :]) / h
    w = 1.0 - t * t
    k = np.where(np.abs(t) <= 1.0, 0.9375 * w * w, 0.0)
    return k.sum(axis=1), k @ x
