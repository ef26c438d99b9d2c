"""Linear wavelet estimators of the density of Y, of g_j(y) = E[X_j 1{Y=y}],
their truncated ratio, and the resulting estimate of Cov(E[X | Y]).

With K the projection kernel of the father wavelet and u = 2**j_n:

    f_n(y)   = (u / n) sum_i K(u y, u Y_i)
    g_j,n(y) = (1 / n) sum_i X_ij u K(u Y_i, u y)
    R_j(y)   = g_j,n(y) / max(f_n(y), b_n)
    Lambda_n = (1 / n) sum_i R(Y_i) R(Y_i)^T

Admissible rates, when j_n and b_n grow with n, are 2**-j_n ~ n**-c1 and
b_n ~ n**-c2 with 0 < c2 < 1/10 and 1/8 + c2/4 < c1 < 1/4 - c2.  They are
not enforced; fixed (j_n, b_n) such as (0, 0.01) is the usual choice at
moderate n.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._backend import get_kernels
from .wavelets import FatherWavelet, build_wavelet

SYM_TOL = 1e-10
PSD_TOL = 1e-8


class SampleFormatError(ValueError):
    """Malformed sample CSV; ``lineno`` is 1-based and counts the header."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Sample:
    x: np.ndarray  # (n, d)
    y: np.ndarray  # (n,)

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float).ravel()
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[1] < 1:
            raise ValueError(f"x must be an (n, d) matrix with d >= 1, got shape {x.shape}")
        if x.shape[0] != y.shape[0]:
            raise ValueError(f"x has {x.shape[0]} rows but y has {y.shape[0]} entries")
        if y.shape[0] < 2:
            raise ValueError("a sample needs at least 2 observations")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("sample entries must be finite")
        x = np.ascontiguousarray(x)
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    def canonical(self) -> "Sample":
        """Rows sorted by (y, x1, ..., xd); fixes the floating-point summation order."""
        order = canonical_order(self.y, self.x)
        return Sample(self.x[order], self.y[order])

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class EstimatorConfig:
    j_n: int = 0
    b_n: float = 0.01
    wavelet: FatherWavelet = field(default_factory=lambda: build_wavelet("haar"))

    def __post_init__(self):
        if int(self.j_n) != self.j_n or self.j_n < 0:
            raise ValueError(f"j_n must be a nonnegative integer, got {self.j_n!r}")
        if not (np.isfinite(self.b_n) and self.b_n > 0):
            raise ValueError(f"b_n must be positive, got {self.b_n!r}")
        object.__setattr__(self, "j_n", int(self.j_n))

    @property
    def scale(self) -> float:
        return 2.0**self.j_n


@dataclass(frozen=True)
class LambdaMatrix:
    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"Lambda must be square, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @property
    def d(self) -> int:
        return self.m.shape[0]

    def check(self, sym_tol=SYM_TOL, psd_tol=PSD_TOL):
        """Raise ValueError unless the matrix is symmetric and PSD."""
        scale = max(1.0, float(np.max(np.abs(self.m))))
        if np.max(np.abs(self.m - self.m.T)) > sym_tol * scale:
            raise ValueError("Lambda is not symmetric")
        if np.linalg.eigvalsh(self.m).min() < -psd_tol * scale:
            raise ValueError("Lambda is not positive semidefinite")
        return self


def canonical_order(y, x):
    keys = [x[:, c] for c in range(x.shape[1] - 1, -1, -1)] + [y]
    return np.lexsort(keys)


def wavelet_moments(query, y, x, cfg: EstimatorConfig, method="direct", backend=None):
    """Kernel sums s0(q) = sum_i K(u q, u Y_i) and s1(q) = sum_i K(.) X_i.

    ``method`` is 'direct' (pairwise, O(n * len(query))), 'bucket' (Haar
    only, bit-identical to 'direct') or 'projection' (accumulate the
    scaling coefficients first, O(n + len(query)); equal to 'direct' up to
    rounding, for large n).
    """
    w = cfg.wavelet
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    order = canonical_order(y, x)
    u = np.ascontiguousarray(y[order] * cfg.scale)
    x = np.ascontiguousarray(x[order])
    q = np.ascontiguousarray(np.atleast_1d(np.asarray(query, dtype=float)) * cfg.scale)
    if method == "direct":
        return get_kernels(backend).wavelet_moments(
            q, u, x, w.table, 2.0**w.depth, w.support, w.is_haar)
    if method == "bucket":
        if not w.is_haar:
            raise ValueError("the bucketed path exists only for the Haar wavelet")
        return get_kernels(backend).haar_moments_bucketed(q, u, x)
    if method == "projection":
        return _projection_moments(q, u, x, w, backend)
    raise ValueError(f"unknown method {method!r}")


def _projection_moments(q, u, x, w, backend):
    # coefficients c_m = sum_i phi(u_i - m), then s(q) = sum_m phi(q - m) c_m
    from .wavelets import eval_phi
    lo = int(np.floor(u.min())) - w.support + 1
    hi = int(np.floor(u.max()))
    nm = hi - lo + 1
    c0 = np.zeros(nm)
    c1 = np.zeros((nm, x.shape[1]))
    fu = np.floor(u)
    for s in range(w.support):
        m = fu - s
        p = eval_phi(w, u - m, backend)
        np.add.at(c0, (m - lo).astype(np.int64), p)
        np.add.at(c1, (m - lo).astype(np.int64), p[:, None] * x)
    s0 = np.zeros(q.shape[0])
    s1 = np.zeros((q.shape[0], x.shape[1]))
    fq = np.floor(q)
    for s in range(w.support):
        m = fq - s
        idx = (m - lo).astype(np.int64)
        ok = (idx >= 0) & (idx < nm)
        p = eval_phi(w, q - m, backend) * ok
        idx = np.where(ok, idx, 0)
        s0 += p * c0[idx]
        s1 += p[:, None] * c1[idx]
    return s0, s1


def density_estimate(ys, cfg: EstimatorConfig, y, method="direct", backend=None):
    """Linear wavelet density estimate of the responses ``ys`` at ``y``.

    Daubechies kernels are not nonnegative, so small negative values may
    come back; the truncation floor deals with them downstream.
    """
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    scalar = np.ndim(y) == 0
    s0, _ = wavelet_moments(y, ys, np.zeros((ys.shape[0], 1)), cfg, method, backend)
    f = cfg.scale * s0 / ys.shape[0]
    return float(f[0]) if scalar else f


def truncated_density(f, b_n: float):
    """max(f, b_n)."""
    if not b_n > 0:
        raise ValueError(f"b_n must be positive, got {b_n!r}")
    out = np.maximum(f, b_n)
    return float(out) if np.ndim(out) == 0 else out


def g_estimate(sample: Sample, j: int, cfg: EstimatorConfig, y, method="direct", backend=None):
    """Estimate of g_j at ``y``; ``j`` is a 1-based coordinate index."""
    if not 1 <= j <= sample.d:
        raise IndexError(f"coordinate index {j} out of range 1..{sample.d}")
    scalar = np.ndim(y) == 0
    _, s1 = wavelet_moments(y, sample.y, sample.x[:, j - 1:j], cfg, method, backend)
    g = cfg.scale * s1[:, 0] / sample.n
    return float(g[0]) if scalar else g


def _ratio_from_moments(s0, s1, n, scale, b_n):
    f = scale * s0 / n
    g = scale * s1 / n
    return g / np.maximum(f, b_n)[:, None], f


def r_hat(sample: Sample, cfg: EstimatorConfig, y, method="direct", backend=None):
    """Estimated conditional mean E[X | Y = y] with truncated denominator.

    Returns a d-vector for scalar ``y`` and an (m, d) array otherwise.
    """
    scalar = np.ndim(y) == 0
    s0, s1 = wavelet_moments(y, sample.y, sample.x, cfg, method, backend)
    r, _ = _ratio_from_moments(s0, s1, sample.n, cfg.scale, cfg.b_n)
    return r[0] if scalar else r


def r_hat_at_sample(sample: Sample, cfg: EstimatorConfig, method="direct", backend=None):
    """R_hat(Y_i) for every observation, shape (n, d)."""
    return r_hat(sample, cfg, sample.y, method, backend)


def lambda_from_ratios(r: np.ndarray) -> LambdaMatrix:
    """Average of outer products r_i r_i^T, summed in row order."""
    m = (r[:, :, None] * r[:, None, :]).sum(axis=0) / r.shape[0]
    return LambdaMatrix(0.5 * (m + m.T))


def lambda_hat(sample: Sample, cfg: EstimatorConfig, method="direct", backend=None) -> LambdaMatrix:
    """(1/n) sum_i R_hat(Y_i) R_hat(Y_i)^T."""
    return lambda_from_ratios(r_hat_at_sample(sample.canonical(), cfg, method, backend))


def whiten(sample: Sample):
    """Center X and whiten by the inverse square root of its sample covariance.

    Returns the whitened sample and the (d, d) matrix mapping directions
    found in whitened coordinates back to the original ones.
    """
    xc = sample.x - sample.x.mean(axis=0)
    cov = np.atleast_2d(np.cov(xc, rowvar=False))
    w, v = np.linalg.eigh(cov)
    if w.min() <= 0:
        raise ValueError("sample covariance of X is singular; cannot whiten")
    inv_sqrt = (v / np.sqrt(w)) @ v.T
    return Sample(xc @ inv_sqrt, sample.y), inv_sqrt


def read_sample_csv(source) -> Sample:
    """Read a sample from CSV with header ``y,x1,...,xd``.

    ``source`` is a path or an open text stream.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_sample_csv(fh)
    reader = csv.reader(source)
    header = None
    rows = []
    for lineno, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if header is None:
            header = [c.strip() for c in row]
            d = len(header) - 1
            expected = ["y"] + [f"x{k}" for k in range(1, d + 1)]
            if d < 1 or header != expected:
                raise SampleFormatError(
                    f"header must be {','.join(['y', 'x1', '...', 'xd'])}, got {','.join(header)}", lineno)
            continue
        if len(row) != len(header):
            raise SampleFormatError(f"expected {len(header)} fields, got {len(row)}", lineno)
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise SampleFormatError(f"non-numeric field in {row!r}", lineno) from None
        if not all(np.isfinite(vals)):
            raise SampleFormatError("non-finite value", lineno)
        rows.append(vals)
    if header is None or not rows:
        raise SampleFormatError("no observations")
    if len(rows) < 2:
        raise SampleFormatError("need at least 2 observations")
    arr = np.array(rows)
    return Sample(arr[:, 1:], arr[:, 0])


def write_sample_csv(sample: Sample, dest) -> None:
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="") as fh:
            return write_sample_csv(sample, fh)
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(["y"] + [f"x{k}" for k in range(1, sample.d + 1)])
    for yi, xi in zip(sample.y, sample.x):
        w.writerow([repr(float(yi))] + [repr(float(v)) for v in xi])


def sample_to_csv_text(sample: Sample) -> str:
    buf = io.StringIO()
    write_sample_csv(sample, buf)
    return buf.getvalue()
