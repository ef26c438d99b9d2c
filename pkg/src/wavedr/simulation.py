"""Simulation models, seeded replication runs and Table 1/2 style summaries.

Every replication draws from its own generator, seeded from
(master_seed, model, replication index), so results do not depend on the
number of worker threads or on execution order.  For a given replication
index all methods see the same data set.
"""
from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .baselines import KernelConfig, SirConfig, kernel_lambda, sir_lambda
from .edr import EdrFit, fit_directions, squared_cosine, subspace_r2
from .estimators import EstimatorConfig, LambdaMatrix, Sample, lambda_hat, whiten
from .wavelets import build_wavelet

D = 5
RESULT_FIELDS = ["model", "method", "n", "reps", "seed", "stat", "component", "value"]
BOXPLOT_FIELDS = ["model", "method", "rep", "direction", "r2"]


class Method(str, Enum):
    SIR = "sir"
    KERNEL = "kernel"
    WAVELET_H = "wavelet-h"
    WAVELET_D = "wavelet-d"

    @property
    def label(self) -> str:
        return {"sir": "SIR", "kernel": "Kernel",
                "wavelet-h": "Wavelet (H)", "wavelet-d": "Wavelet (D)"}[self.value]


METHODS = tuple(Method)


def parse_method(name) -> Method:
    if isinstance(name, Method):
        return name
    key = str(name).lower().replace("_", "-").replace(" ", "")
    aliases = {"wavelet(h)": "wavelet-h", "waveleth": "wavelet-h", "haar": "wavelet-h",
               "wavelet(d)": "wavelet-d", "waveletd": "wavelet-d", "daubechies": "wavelet-d"}
    try:
        return Method(aliases.get(key, key))
    except ValueError:
        raise ValueError(f"unknown method {name!r}; expected one of "
                         f"{[m.value for m in Method]}") from None


@dataclass(frozen=True)
class ModelSpec:
    id: int
    d: int
    N: int
    true_betas: np.ndarray  # (d, N)

    def response(self, x: np.ndarray, eps: np.ndarray) -> np.ndarray:
        if self.id == 1:
            return x[:, 0] + x[:, 1] + x[:, 2] + x[:, 3] + eps
        if self.id == 2:
            return x[:, 0] * (x[:, 0] + x[:, 1] + 1.0) + eps
        return x[:, 0] / (0.5 + (x[:, 1] + 1.5) ** 2) + eps


def _model(i, *betas):
    b = np.array(betas, dtype=float).T
    b.setflags(write=False)
    return ModelSpec(i, D, b.shape[1], b)


MODELS = {
    1: _model(1, (1, 1, 1, 1, 0)),
    2: _model(2, (1, 0, 0, 0, 0), (1, 1, 0, 0, 0)),
    3: _model(3, (1, 0, 0, 0, 0), (0, 1, 0, 0, 0)),
}


def get_model(model) -> ModelSpec:
    if isinstance(model, ModelSpec):
        return model
    key = int(str(model).upper().lstrip("M"))
    if key not in MODELS:
        raise ValueError(f"unknown model {model!r}; expected 1, 2 or 3")
    return MODELS[key]


def replication_seed(master_seed: int, model: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(master_seed), spawn_key=(int(model), int(rep)))


def generate(model, n: int, seed) -> Sample:
    """X ~ N(0, I_5), eps ~ N(0, 1), Y from the model equation."""
    spec = get_model(model)
    if n < 2:
        raise ValueError("n must be at least 2")
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed), spawn_key=(spec.id,))
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.standard_normal((n, spec.d))
    eps = rng.standard_normal(n)
    y = spec.response(x, eps)
    return Sample(x, y)


@dataclass(frozen=True)
class MethodSettings:
    """Tuning shared by the four estimators; defaults follow the simulation study."""

    H: int = 5
    j_n: int = 0
    b_n: float = 0.01
    bandwidth: float | None = None  # None: n ** -0.2
    kernel_b_n: float = 0.01
    whiten: bool = True
    depth: int = 12

    def __post_init__(self):
        SirConfig(self.H)
        EstimatorConfig(self.j_n, self.b_n, build_wavelet("haar", 1))
        KernelConfig(self.bandwidth or 1.0, self.kernel_b_n)


_WAVELET_CACHE: dict = {}


def _wavelet(family, depth):
    key = (family, depth)
    if key not in _WAVELET_CACHE:
        _WAVELET_CACHE[key] = build_wavelet(family, depth)
    return _WAVELET_CACHE[key]


def estimate_lambda(sample: Sample, method, settings: MethodSettings = MethodSettings(),
                    backend=None) -> LambdaMatrix:
    method = parse_method(method)
    if method is Method.SIR:
        return sir_lambda(sample, SirConfig(settings.H))
    if method is Method.KERNEL:
        h = settings.bandwidth if settings.bandwidth is not None else sample.n ** -0.2
        return kernel_lambda(sample, KernelConfig(h, settings.kernel_b_n), backend)
    family = "haar" if method is Method.WAVELET_H else "daubechies2"
    cfg = EstimatorConfig(settings.j_n, settings.b_n, _wavelet(family, settings.depth))
    return lambda_hat(sample, cfg, backend=backend)


def estimate_edr(sample: Sample, method, settings: MethodSettings = MethodSettings(),
                 backend=None) -> EdrFit:
    """Estimate Lambda by ``method`` and decompose it.

    With ``settings.whiten`` the estimator runs on centered, whitened X and
    the eigenvectors are mapped back to the original coordinates.
    """
    if settings.whiten:
        ws, back = whiten(sample)
        return fit_directions(estimate_lambda(ws, method, settings, backend), back)
    return fit_directions(estimate_lambda(sample, method, settings, backend))


def align(beta_hat: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Flip ``beta_hat`` to a nonnegative inner product with ``beta`` and give it |beta|."""
    b = np.asarray(beta_hat, dtype=float)
    if b @ beta < 0:
        b = -b
    return b * (np.linalg.norm(beta) / np.linalg.norm(b))


@dataclass
class Replication:
    rep: int
    directions: np.ndarray   # (d, N) aligned and scaled
    r2: np.ndarray           # (N,) squared multiple correlation with the EDR space
    cos2: np.ndarray         # (N,) squared cosine with the matching beta_j
    eigenvalues: np.ndarray


def run_one(model, method, n: int, master_seed: int, rep: int,
            settings: MethodSettings = MethodSettings(), backend=None) -> Replication:
    spec = get_model(model)
    sample = generate(spec, n, replication_seed(master_seed, spec.id, rep))
    fit = estimate_edr(sample, method, settings, backend)
    dirs = fit.first(spec.N)
    aligned = np.column_stack([align(dirs[:, j], spec.true_betas[:, j]) for j in range(spec.N)])
    r2 = np.array([subspace_r2(dirs[:, j], spec.true_betas) for j in range(spec.N)])
    cos2 = np.array([squared_cosine(dirs[:, j], spec.true_betas[:, j]) for j in range(spec.N)])
    return Replication(rep, aligned, r2, cos2, np.array(fit.estimate.eigenvalues))


def _sd(a: np.ndarray) -> np.ndarray:
    if a.shape[0] < 2:
        return np.zeros(a.shape[1:])
    return a.std(axis=0, ddof=1)


@dataclass
class ReplicationSummary:
    model: int
    method: Method
    n: int
    reps: int
    seed: int
    beta_means: np.ndarray   # (d, N)
    beta_sds: np.ndarray
    r2_means: np.ndarray     # (N,)
    r2_sds: np.ndarray
    cos2_means: np.ndarray
    cos2_sds: np.ndarray
    r2_values: np.ndarray = field(repr=False)  # (reps, N)

    @classmethod
    def from_replications(cls, model, method, n, seed, reps: list[Replication]):
        dirs = np.stack([r.directions for r in reps])
        r2 = np.stack([r.r2 for r in reps])
        cos2 = np.stack([r.cos2 for r in reps])
        return cls(get_model(model).id, parse_method(method), n, len(reps), seed,
                   dirs.mean(axis=0), _sd(dirs), r2.mean(axis=0), _sd(r2),
                   cos2.mean(axis=0), _sd(cos2), r2)


def default_threads() -> int:
    return max(1, int(os.environ.get("WAVEDR_THREADS", "1")))


def run_replications(model, method, n: int = 500, reps: int = 100, master_seed: int = 0,
                     settings: MethodSettings = MethodSettings(), threads: int | None = None,
                     backend=None) -> ReplicationSummary:
    if reps < 1:
        raise ValueError("reps must be >= 1")
    threads = default_threads() if threads is None else threads

    def job(r):
        return run_one(model, method, n, master_seed, r, settings, backend)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, range(reps)))
    else:
        results = [job(r) for r in range(reps)]
    return ReplicationSummary.from_replications(model, method, n, master_seed, results)


def run_study(models=(1, 2, 3), methods=METHODS, n=500, reps=100, master_seed=0,
              settings=MethodSettings(), threads=None, backend=None) -> list[ReplicationSummary]:
    return [run_replications(m, meth, n, reps, master_seed, settings, threads, backend)
            for m in models for meth in methods]


def summarize_tables(summaries, stats=("beta_mean", "beta_sd", "r2_mean", "r2_sd",
                                       "cos2_mean", "cos2_sd")) -> list[dict]:
    """Long-format rows: one per (summary, stat, component)."""
    rows = []
    for s in summaries:
        base = {"model": s.model, "method": s.method.value, "n": s.n, "reps": s.reps, "seed": s.seed}
        for stat in stats:
            if stat in ("beta_mean", "beta_sd"):
                arr = s.beta_means if stat == "beta_mean" else s.beta_sds
                # components of beta_1, then beta_2, ...: "j.k"
                items = [(f"{j + 1}.{k + 1}", arr[k, j])
                         for j in range(arr.shape[1]) for k in range(arr.shape[0])]
            else:
                arr = getattr(s, stat.replace("_mean", "_means").replace("_sd", "_sds"))
                items = [(str(j + 1), arr[j]) for j in range(arr.shape[0])]
            rows.extend({**base, "stat": stat, "component": c, "value": float(v)} for c, v in items)
    return rows


def write_results_csv(rows, dest) -> None:
    with open(dest, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=RESULT_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**r, "value": repr(float(r["value"]))})


def read_results_csv(src) -> list[dict]:
    with open(src, newline="") as fh:
        return [{**r, "value": float(r["value"])} for r in csv.DictReader(fh)]


def boxplot_rows(summaries) -> list[dict]:
    rows = []
    for s in summaries:
        for rep, vals in enumerate(s.r2_values):
            for j, v in enumerate(vals):
                rows.append({"model": s.model, "method": s.method.value, "rep": rep,
                             "direction": j + 1, "r2": repr(float(v))})
    return rows


def write_boxplot_csv(summaries, dest) -> None:
    with open(dest, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=BOXPLOT_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(boxplot_rows(summaries))


PLOT_SCRIPT = '''"""Boxplots of R^2 per model, direction and method.

Usage: python {name} {csv}   (needs pandas and matplotlib)
"""
import sys

import matplotlib.pyplot as plt
import pandas as pd

df = pd.read_csv(sys.argv[1] if len(sys.argv) > 1 else "{csv}")
order = ["sir", "kernel", "wavelet-h", "wavelet-d"]
for model, sub in df.groupby("model"):
    dirs = sorted(sub["direction"].unique())
    fig, axes = plt.subplots(1, len(dirs), figsize=(5 * len(dirs), 4), squeeze=False)
    for ax, j in zip(axes[0], dirs):
        part = sub[sub["direction"] == j]
        methods = [m for m in order if m in set(part["method"])]
        ax.boxplot([part.loc[part["method"] == m, "r2"] for m in methods], labels=methods)
        ax.set_title(f"Model {{model}}: R^2 of direction {{j}}")
    fig.tight_layout()
    fig.savefig(f"boxplot_model{{model}}.png", dpi=120)
'''


def write_plot_script(dest, csv_name) -> None:
    dest = Path(dest)
    dest.write_text(PLOT_SCRIPT.format(name=dest.name, csv=csv_name))
