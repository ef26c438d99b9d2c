"""Plug-in estimates of the limiting variances of the wavelet Lambda estimator
and of its leading eigenvectors, with Monte Carlo checks.

Population quantities (R, lambda_r, beta_r) are replaced by their sample
counterparts. Two per-observation influence terms are available:

``"stated"``
    sym(X R^T) = (X R^T + R X^T) / 2, the term appearing in the stated
    limit law.
``"full"``
    X R^T + R X^T - R R^T, the linearisation of (1/n) sum R_hat R_hat^T
    that also accounts for the estimated ratio at each Y_i.

``"stated"`` is the default everywhere; ``"full"`` is offered as a
diagnostic because it is the one that tracks the replication variance at
moderate n.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .edr import DegenerateGapError, EdrEstimate, eig_sym
from .estimators import EstimatorConfig, Sample, lambda_from_ratios, r_hat_at_sample
from .simulation import default_threads, generate, get_model, replication_seed

INFLUENCES = ("stated", "full")
GAP_TOL = 1e-8


def _check_influence(influence):
    if influence not in INFLUENCES:
        raise ValueError(f"influence must be one of {INFLUENCES}, got {influence!r}")


def trace_statistic(x, r, A, influence="stated") -> np.ndarray:
    """Per-observation U_i whose variance is the limiting variance of tr(A^T Lambda_n).

    With A_s = (A + A^T) / 2: ``stated`` gives X_i^T A_s R_i and ``full``
    gives 2 X_i^T A_s R_i - R_i^T A_s R_i.
    """
    _check_influence(influence)
    A = np.asarray(A, dtype=float)
    a_s = 0.5 * (A + A.T)
    xar = np.einsum("ik,kl,il->i", x, a_s, r)
    if influence == "stated":
        return xar
    return 2.0 * xar - np.einsum("ik,kl,il->i", r, a_s, r)


def sigma2_A_plugin(sample: Sample, cfg: EstimatorConfig, A, influence="stated", backend=None) -> float:
    """Sample variance (divisor n - 1) of the trace statistic at the plug-in R_hat."""
    A = np.asarray(A, dtype=float)
    if A.shape != (sample.d, sample.d) or not np.all(np.isfinite(A)):
        raise ValueError(f"A must be a finite {sample.d}x{sample.d} matrix")
    s = sample.canonical()
    r = r_hat_at_sample(s, cfg, backend=backend)
    return float(np.var(trace_statistic(s.x, r, A, influence), ddof=1))


@dataclass(frozen=True)
class VarianceReport:
    sigma2_A: float          # mean plug-in over replications
    mc_variance: float       # n * Var(tr(A^T Lambda_n)) across replications
    relative_gap: float
    sigma2_A_full: float     # same with the full influence term
    reps: int
    n: int
    mean_trace: float
    reference_trace: float | None = None

    @property
    def relative_gap_full(self) -> float:
        return abs(self.sigma2_A_full - self.mc_variance) / max(self.sigma2_A_full, 1e-300)


def reference_lambda(model, cfg: EstimatorConfig, n: int = 10**6, seed: int = 0, backend=None):
    """Lambda_n from one very large sample, via the coefficient (projection) path."""
    s = generate(model, n, np.random.SeedSequence(int(seed), spawn_key=(get_model(model).id, 2**31)))
    r = r_hat_at_sample(s, cfg, method="projection", backend=backend)
    return lambda_from_ratios(r)


def mc_trace_variance(model, A, n: int, reps: int, seed: int, cfg: EstimatorConfig,
                      threads: int | None = None, reference_n: int | None = None,
                      backend=None) -> VarianceReport:
    """Compare the plug-in variance with the replication variance of sqrt(n) tr(A^T Lambda_n).

    The centering constant does not affect the variance; ``reference_n``
    only adds a large-sample reference trace to the report.
    """
    if reps < 2:
        raise ValueError("reps must be >= 2")
    spec = get_model(model)
    A = np.asarray(A, dtype=float)
    threads = default_threads() if threads is None else threads

    def job(rep):
        s = generate(spec, n, replication_seed(seed, spec.id, rep)).canonical()
        r = r_hat_at_sample(s, cfg, backend=backend)
        lam = lambda_from_ratios(r).m
        t = float(np.sum(A * lam))
        return (t, float(np.var(trace_statistic(s.x, r, A, "stated"), ddof=1)),
                float(np.var(trace_statistic(s.x, r, A, "full"), ddof=1)))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = np.array(list(pool.map(job, range(reps))))
    else:
        out = np.array([job(r) for r in range(reps)])
    mc = float(n * np.var(out[:, 0], ddof=1))
    plug = float(out[:, 1].mean())
    ref = None
    if reference_n:
        ref = float(np.sum(A * reference_lambda(spec, cfg, reference_n, seed, backend).m))
    gap = abs(plug - mc) / max(plug, 1e-300)
    return VarianceReport(plug, mc, gap, float(out[:, 2].mean()), reps, n, float(out[:, 0].mean()), ref)


@dataclass(frozen=True)
class DirectionCovariance:
    sigma_j: np.ndarray

    def __post_init__(self):
        s = np.array(self.sigma_j, dtype=float)
        s.setflags(write=False)
        object.__setattr__(self, "sigma_j", s)


def direction_influence(x, r, e: EdrEstimate, j: int, form="perturbation", influence="stated"):
    """Realised vectors W_j(X_i, Y_i), shape (n, d); ``j`` is 1-based.

    ``perturbation``: W_j = sum_{r != j} beta_r (beta_r^T M beta_j) / (lambda_j - lambda_r),
    the first-order eigenvector perturbation. ``literal``: W_jk =
    (sum_{r != j} beta_rk / (lambda_j - lambda_r)) * beta_j^T M beta_j.
    M is the per-observation influence matrix selected by ``influence``.
    """
    _check_influence(influence)
    lam, beta = e.eigenvalues, e.eigenvectors
    d = lam.shape[0]
    if not 1 <= j <= d:
        raise IndexError(f"direction index {j} out of range 1..{d}")
    jj = j - 1
    others = [r_ for r_ in range(d) if r_ != jj]
    if not others:
        return np.zeros((x.shape[0], d))
    gaps = lam[jj] - lam[others]
    if np.min(np.abs(gaps)) <= GAP_TOL:
        raise DegenerateGapError(f"eigen-gap too small at direction {j}: {np.min(np.abs(gaps)):.3g}")
    bx = x @ beta          # (n, d): beta_r^T X_i
    br = r @ beta          # beta_r^T R_i

    def quad(a, b):
        # beta_a^T M_i beta_b for every i
        v = 0.5 * (bx[:, a] * br[:, b] + br[:, a] * bx[:, b])
        if influence == "full":
            v = 2.0 * v - br[:, a] * br[:, b]
        return v

    if form == "literal":
        c = beta[:, others] @ (1.0 / gaps)
        return quad(jj, jj)[:, None] * c[None, :]
    if form == "perturbation":
        coef = np.column_stack([quad(r_, jj) / g for r_, g in zip(others, gaps)])
        return coef @ beta[:, others].T
    raise ValueError(f"form must be 'perturbation' or 'literal', got {form!r}")


def sigma_j_plugin(sample: Sample, cfg: EstimatorConfig, e: EdrEstimate, j: int,
                   form="perturbation", influence="stated", backend=None) -> DirectionCovariance:
    """Empirical covariance of the realised W_j vectors."""
    s = sample.canonical()
    r = r_hat_at_sample(s, cfg, backend=backend)
    w = direction_influence(s.x, r, e, j, form, influence)
    cov = np.atleast_2d(np.cov(w, rowvar=False, ddof=1))
    return DirectionCovariance(0.5 * (cov + cov.T))


def replication_direction_cov(model, n: int, reps: int, seed: int, cfg: EstimatorConfig, j: int = 1,
                              threads: int | None = None, backend=None):
    """Covariance over replications of the unit eigenvector beta_j of Lambda_n.

    Each estimate is sign-aligned to the true beta_j. Also returns the mean
    plug-in covariance (both forms and influences) for comparison.
    """
    spec = get_model(model)
    target = spec.true_betas[:, j - 1] if j <= spec.N else None
    threads = default_threads() if threads is None else threads

    def job(rep):
        s = generate(spec, n, replication_seed(seed, spec.id, rep)).canonical()
        r = r_hat_at_sample(s, cfg, backend=backend)
        e = eig_sym(lambda_from_ratios(r))
        b = np.array(e.eigenvectors[:, j - 1])
        if target is not None and b @ target < 0:
            b = -b
        plug = {(f, i): np.cov(direction_influence(s.x, r, e, j, f, i), rowvar=False)
                for f in ("perturbation", "literal") for i in INFLUENCES}
        return b, plug

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(job, range(reps)))
    else:
        out = [job(r) for r in range(reps)]
    betas = np.stack([o[0] for o in out])
    plug = {k: np.mean([o[1][k] for o in out], axis=0) for k in out[0][1]}
    return np.cov(betas, rowvar=False), plug
