"""Compactly supported father wavelets and their projection kernel.

Two families are provided: Haar, evaluated analytically, and the 4-tap
Daubechies scaling function, tabulated on a dyadic grid by the cascade
(recursive refinement) algorithm and evaluated by linear interpolation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._backend import get_kernels

SQRT2 = math.sqrt(2.0)
DEFAULT_DEPTH = 12


class Family(str, Enum):
    HAAR = "haar"
    DAUBECHIES2 = "daubechies2"


_ALIASES = {
    "haar": Family.HAAR, "h": Family.HAAR, "db1": Family.HAAR,
    "daubechies2": Family.DAUBECHIES2, "d": Family.DAUBECHIES2,
    "db2": Family.DAUBECHIES2, "d2": Family.DAUBECHIES2,
}


def daubechies2_filter() -> np.ndarray:
    """Orthonormal 4-tap low-pass filter, normalised so that sum(h) = sqrt(2)."""
    s3 = math.sqrt(3.0)
    return np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / (4 * SQRT2)


def haar_filter() -> np.ndarray:
    return np.array([1.0, 1.0]) / SQRT2


@dataclass(frozen=True)
class FatherWavelet:
    """A scaling function supported on [0, support].

    ``table[m]`` holds phi(m / 2**depth) for 0 <= m <= support * 2**depth.
    """

    family: Family
    support: int
    refinement_filter: np.ndarray = field(repr=False)
    depth: int
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.refinement_filter.setflags(write=False)
        self.table.setflags(write=False)

    @property
    def is_haar(self) -> bool:
        return self.family is Family.HAAR

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.table.shape[0]) / 2.0**self.depth

    def __call__(self, x):
        return eval_phi(self, x)


def _parse_family(family) -> Family:
    if isinstance(family, Family):
        return family
    try:
        return _ALIASES[str(family).lower()]
    except KeyError:
        raise ValueError(f"unsupported wavelet family {family!r}; "
                         f"expected one of {sorted(set(_ALIASES))}") from None


def integer_values(h: np.ndarray) -> np.ndarray:
    """phi at the integers 0..len(h)-1 from the refinement eigen-system.

    phi(n) = sqrt(2) * sum_k h_k phi(2n - k) makes the vector of integer
    values an eigenvector of M[n, m] = sqrt(2) h_{2n-m} for eigenvalue 1,
    normalised by sum_n phi(n) = 1.
    """
    s = len(h) - 1
    m = np.zeros((s + 1, s + 1))
    for n in range(s + 1):
        for k in range(s + 1):
            if 0 <= 2 * n - k <= s:
                m[n, k] = SQRT2 * h[2 * n - k]
    # interior points only: phi vanishes at both support ends
    inner = m[1:s, 1:s]
    w, v = np.linalg.eig(inner)
    idx = int(np.argmin(np.abs(w - 1.0)))
    if abs(w[idx] - 1.0) > 1e-10:
        raise ValueError("refinement filter has no unit eigenvalue")
    vec = np.real(v[:, idx])
    out = np.zeros(s + 1)
    out[1:s] = vec / vec.sum()
    return out


def _cascade(h: np.ndarray, depth: int) -> np.ndarray:
    s = len(h) - 1
    scale = 1 << depth
    table = np.zeros(s * scale + 1)
    table[::scale] = integer_values(h)
    for level in range(1, depth + 1):
        step = 1 << (depth - level)
        idx = np.arange(step, s * scale, 2 * step)
        acc = np.zeros(idx.shape[0])
        for k, hk in enumerate(h):
            src = 2 * idx - k * scale
            ok = (src >= 0) & (src <= s * scale)
            acc[ok] += hk * table[src[ok]]
        table[idx] = SQRT2 * acc
    return table


def build_wavelet(family="daubechies2", depth: int = DEFAULT_DEPTH) -> FatherWavelet:
    """Construct a father wavelet with a dyadic value table of the given depth."""
    fam = _parse_family(family)
    if int(depth) != depth or depth < 1:
        raise ValueError(f"depth must be a positive integer, got {depth!r}")
    depth = int(depth)
    if fam is Family.HAAR:
        h = haar_filter()
        table = np.ones((1 << depth) + 1)
        table[-1] = 0.0
        return FatherWavelet(fam, 1, h, depth, table)
    h = daubechies2_filter()
    return FatherWavelet(fam, 3, h, depth, _cascade(h, depth))


def eval_phi(w: FatherWavelet, x, backend=None):
    """phi(x); zero outside [0, support), linear between table nodes."""
    arr = np.asarray(x, dtype=float)
    flat = np.ascontiguousarray(arr.ravel())
    if w.is_haar:
        out = ((flat >= 0.0) & (flat < 1.0)).astype(float)
    else:
        k = get_kernels(backend)
        out = k.phi_values(w.table, 2.0**w.depth, w.support, flat)
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def projection_kernel(w: FatherWavelet, x, y):
    """K(x, y) = sum_k phi(x - k) phi(y - k), summed over the finite window."""
    xa, ya = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if w.is_haar:
        out = (np.floor(xa) == np.floor(ya)).astype(float)
    else:
        out = np.zeros(xa.shape)
        fy = np.floor(ya)
        for s in range(w.support):
            m = fy - w.support + 1 + s
            out = out + eval_phi(w, ya - m) * eval_phi(w, xa - m)
        out = np.where(np.abs(xa - ya) >= w.support, 0.0, out)
    return float(out) if out.ndim == 0 else out


def partition_of_unity(w: FatherWavelet, x):
    """sum_k phi(x - k); equals 1 for any father wavelet."""
    x = np.asarray(x, dtype=float)
    fx = np.floor(x)
    total = np.zeros(x.shape)
    for s in range(w.support):
        total = total + eval_phi(w, x - (fx - s))
    return total


@dataclass(frozen=True)
class KernelDiagnostics:
    """Measured moment residuals int K(x, y) (y - x)^k dy, k = 1, 2, 3.

    These are recorded, not asserted: Haar already has a nonzero first
    moment away from cell midpoints.
    """

    probes: np.ndarray
    moment_residuals: np.ndarray  # shape (len(probes), 3)
    normalization_residual: np.ndarray

    def as_rows(self):
        for x, mom, nr in zip(self.probes, self.moment_residuals, self.normalization_residual):
            yield {"x": float(x), "m1": float(mom[0]), "m2": float(mom[1]),
                   "m3": float(mom[2]), "norm": float(nr)}


def kernel_diagnostics(w: FatherWavelet, probes, step: float = 2.0**-10) -> KernelDiagnostics:
    probes = np.atleast_1d(np.asarray(probes, dtype=float))
    if not np.all(np.isfinite(probes)):
        raise ValueError("probes must be finite")
    moments = np.zeros((probes.shape[0], 3))
    norm = np.zeros(probes.shape[0])
    for i, x in enumerate(probes):
        if w.is_haar:
            lo, hi = math.floor(x) - x, math.floor(x) + 1 - x
            integrals = [(hi ** (k + 1) - lo ** (k + 1)) / (k + 1) for k in range(4)]
        else:
            # grid aligned to multiples of step so table nodes fall on it
            start = math.floor((x - w.support) / step) * step
            stop = math.ceil((x + w.support) / step) * step
            y = np.linspace(start, stop, int(round((stop - start) / step)) + 1)
            kv = projection_kernel(w, x, y)
            integrals = [np.trapezoid(kv * (y - x) ** k, y) for k in range(4)]
        norm[i] = abs(integrals[0] - 1.0)
        moments[i] = integrals[1:]
    return KernelDiagnostics(probes, moments, norm)
