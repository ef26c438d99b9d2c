"""Spectral analysis of an estimated Cov(E[X|Y]) and direction accuracy metrics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimators import LambdaMatrix, SYM_TOL


class DegenerateGapError(ValueError):
    """Two eigenvalues are too close for a direction-level computation."""


@dataclass(frozen=True)
class EdrEstimate:
    """Eigenvalues in descending order with matching unit eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source: LambdaMatrix

    @property
    def d(self) -> int:
        return self.eigenvalues.shape[0]


def sign_convention(v: np.ndarray) -> np.ndarray:
    """Flip columns so each one's largest-magnitude entry is positive.

    Ties in magnitude go to the lowest index.
    """
    v = np.array(v, dtype=float, copy=True)
    if v.ndim == 1:
        return sign_convention(v[:, None])[:, 0]
    for j in range(v.shape[1]):
        k = int(np.argmax(np.abs(v[:, j])))  # first maximum
        if v[k, j] < 0:
            v[:, j] = -v[:, j]
    return v


def eig_sym(m) -> EdrEstimate:
    """Eigen-decomposition of a symmetric matrix (LAPACK ``syevd`` via numpy).

    Eigenvalues are sorted descending with a stable sort, so equal
    eigenvalues keep the solver's column order.
    """
    lam = m if isinstance(m, LambdaMatrix) else LambdaMatrix(m)
    a = lam.m
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if np.max(np.abs(a - a.T)) > SYM_TOL * scale:
        raise ValueError("matrix is not symmetric")
    w, v = np.linalg.eigh(0.5 * (a + a.T))
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    v = sign_convention(v / np.linalg.norm(v, axis=0))
    w.setflags(write=False)
    v.setflags(write=False)
    return EdrEstimate(w, v, lam)


def edr_directions(e: EdrEstimate, n_dirs: int) -> np.ndarray:
    if not 1 <= n_dirs <= e.d:
        raise ValueError(f"number of directions must be in 1..{e.d}, got {n_dirs}")
    return np.array(e.eigenvectors[:, :n_dirs])


def squared_cosine(a, b) -> float:
    """(a.b)^2 / (|a|^2 |b|^2)."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    aa, bb = float(a @ a), float(b @ b)
    if aa == 0.0 or bb == 0.0:
        raise ValueError("squared cosine is undefined for a zero vector")
    return min(1.0, float(a @ b) ** 2 / (aa * bb))


def subspace_r2(a, basis) -> float:
    """Squared multiple correlation of ``a`` with the span of ``basis`` columns.

    Largest squared cosine between ``a`` and any vector of the subspace
    (identity covariance). Reduces to ``squared_cosine`` for one column.
    """
    a = np.asarray(a, dtype=float).ravel()
    basis = np.asarray(basis, dtype=float)
    if basis.ndim == 1:
        basis = basis[:, None]
    aa = float(a @ a)
    if aa == 0.0 or not np.any(basis):
        raise ValueError("R^2 is undefined for a zero vector")
    q, _ = np.linalg.qr(basis)
    p = q.T @ a
    return min(1.0, float(p @ p) / aa)


@dataclass(frozen=True)
class EdrFit:
    """Spectral estimate plus directions expressed in the original X coordinates."""

    estimate: EdrEstimate
    directions: np.ndarray  # (d, d), unit columns, original coordinates
    whitened: bool

    def first(self, n_dirs: int) -> np.ndarray:
        if not 1 <= n_dirs <= self.directions.shape[1]:
            raise ValueError(f"number of directions must be in 1..{self.directions.shape[1]}")
        return self.directions[:, :n_dirs]


def fit_directions(lam: LambdaMatrix, back: np.ndarray | None = None) -> EdrFit:
    """Decompose ``lam``; map eigenvectors through ``back`` when X was whitened."""
    e = eig_sym(lam)
    if back is None:
        return EdrFit(e, np.array(e.eigenvectors), False)
    dirs = back @ e.eigenvectors
    dirs = sign_convention(dirs / np.linalg.norm(dirs, axis=0))
    return EdrFit(e, dirs, True)
