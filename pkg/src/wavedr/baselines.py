"""Comparison estimators of Cov(E[X|Y]): sliced inverse regression and the
kernel (Nadaraya-Watson type) plug-in with a biweight kernel."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import get_kernels
from .estimators import LambdaMatrix, Sample, canonical_order, lambda_from_ratios

QUARTIC_CONST = 0.9375


@dataclass(frozen=True)
class SirConfig:
    H: int = 5

    def __post_init__(self):
        if int(self.H) != self.H or self.H < 2:
            raise ValueError(f"number of slices must be an integer >= 2, got {self.H!r}")


@dataclass(frozen=True)
class KernelConfig:
    h: float
    b_n: float = 0.01

    def __post_init__(self):
        if not (np.isfinite(self.h) and self.h > 0):
            raise ValueError(f"bandwidth must be positive, got {self.h!r}")
        if not (np.isfinite(self.b_n) and self.b_n > 0):
            raise ValueError(f"b_n must be positive, got {self.b_n!r}")

    @classmethod
    def default_for(cls, n: int, b_n: float = 0.01) -> "KernelConfig":
        return cls(h=n ** -0.2, b_n=b_n)


def slice_indices(y, H: int) -> list[np.ndarray]:
    """Equal-count slices of the sorted responses.

    Ties in y keep the original index order; the n % H leftover
    observations go one each to the leading slices.
    """
    y = np.asarray(y)
    n = y.shape[0]
    if H > n:
        raise ValueError(f"cannot cut {n} observations into {H} slices")
    order = np.argsort(y, kind="stable")
    base, extra = divmod(n, H)
    sizes = [base + (1 if h < extra else 0) for h in range(H)]
    return np.split(order, np.cumsum(sizes)[:-1])


def sir_lambda(sample: Sample, cfg: SirConfig) -> LambdaMatrix:
    """Sum over slices of (n_h / n) m_h m_h^T, m_h the slice mean of centered X."""
    if cfg.H > sample.n:
        raise ValueError(f"H={cfg.H} exceeds the sample size {sample.n}")
    s = sample.canonical()
    xc = s.x - s.x.mean(axis=0)
    m = np.zeros((s.d, s.d))
    for idx in slice_indices(s.y, cfg.H):
        mh = xc[idx].mean(axis=0)
        m += (idx.shape[0] / s.n) * np.outer(mh, mh)
    return LambdaMatrix(0.5 * (m + m.T))


def quadratic_kernel(x):
    """0.9375 (1 - x^2)^2 on [-1, 1], zero elsewhere."""
    x = np.asarray(x, dtype=float)
    w = 1.0 - x * x
    out = np.where(np.abs(x) <= 1.0, QUARTIC_CONST * w * w, 0.0)
    return float(out) if out.ndim == 0 else out


def kernel_ratio(sample: Sample, cfg: KernelConfig, y, backend=None):
    """Kernel estimate of E[X | Y = y] with density truncated at b_n."""
    scalar = np.ndim(y) == 0
    order = canonical_order(sample.y, sample.x)
    q = np.ascontiguousarray(np.atleast_1d(np.asarray(y, dtype=float)))
    s0, s1 = get_kernels(backend).quartic_moments(
        q, np.ascontiguousarray(sample.y[order]), np.ascontiguousarray(sample.x[order]), cfg.h)
    nh = sample.n * cfg.h
    r = (s1 / nh) / np.maximum(s0 / nh, cfg.b_n)[:, None]
    return r[0] if scalar else r


def kernel_lambda(sample: Sample, cfg: KernelConfig, backend=None) -> LambdaMatrix:
    s = sample.canonical()
    return lambda_from_ratios(kernel_ratio(s, cfg, s.y, backend))
