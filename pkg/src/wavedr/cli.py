"""Command-line front end.

    wavedr estimate DATA.csv [--method wavelet-h] [--n-dirs 1] [--output est.csv]
    wavedr simulate --model 1 --method sir --reps 100 --seed 7 --output res.csv
    wavedr table1 --seed 42 --output table1.csv
    wavedr table2 --seed 42 --output table2.csv --boxplot box.csv --plot-script plot.py
    wavedr diagnostics --wavelet daubechies2 --probes 0.2 0.5 0.7

Exit status is 0 on success and 2 on invalid flags or input.  Flags are
validated before any data is read or any replication runs.
"""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import simulation as sim
from .estimators import SampleFormatError, read_sample_csv
from .wavelets import DEFAULT_DEPTH, build_wavelet, kernel_diagnostics

EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _nonneg_int(s):
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {s}")
    return v


def _pos_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _pos_float(s):
    v = float(s)
    if not (np.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def _add_method_flags(p, with_method=True):
    if with_method:
        p.add_argument("--method", default=None,
                       help="sir, kernel, wavelet-h or wavelet-d")
    g = p.add_argument_group("estimator tuning")
    g.add_argument("--jn", type=_nonneg_int, default=None, help="wavelet resolution level j_n (default 0)")
    g.add_argument("--bn", type=_pos_float, default=None, help="wavelet truncation floor b_n (default 0.01)")
    g.add_argument("--depth", type=_pos_int, default=None,
                   help=f"cascade depth of the Daubechies table (default {DEFAULT_DEPTH})")
    g.add_argument("--H", dest="H", type=_pos_int, default=None, help="SIR slices (default 5)")
    g.add_argument("--bandwidth", type=_pos_float, default=None, help="kernel bandwidth (default n^-0.2)")
    g.add_argument("--kernel-bn", type=_pos_float, default=None,
                   help="kernel-method truncation floor (default 0.01)")
    g.add_argument("--whiten", dest="whiten", action="store_true", default=True,
                   help="center and whiten X before estimation (default)")
    g.add_argument("--no-whiten", dest="whiten", action="store_false",
                   help="estimate on raw X")


def _add_run_flags(p):
    p.add_argument("--n", type=_pos_int, default=500, help="sample size per replication (default 500)")
    p.add_argument("--reps", type=_pos_int, default=100, help="replications (default 100)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--threads", type=_pos_int, default=None,
                   help="worker threads; does not change results (default $WAVEDR_THREADS or 1)")
    p.add_argument("--output", "-o", default=None, help="results CSV (long format)")
    p.add_argument("--boxplot", default=None, help="write per-replication R^2 values for boxplots")
    p.add_argument("--plot-script", default=None, help="write a plotting script for the boxplot CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavedr",
        description="Wavelet-based estimation of effective dimension reduction directions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate EDR directions from a CSV sample",
                       description="Read a CSV with header y,x1,...,xd and print the eigenvalues "
                                   "of the estimated Cov(E[X|Y]) and the leading directions.")
    p.add_argument("input", help="sample CSV (header y,x1,...,xd)")
    _add_method_flags(p)
    p.add_argument("--n-dirs", type=_pos_int, default=1, help="number of directions to print (default 1)")
    p.add_argument("--output", "-o", default=None, help="write eigenvalues, directions and Lambda to CSV")

    p = sub.add_parser("simulate", help="replicate one model with one or all methods",
                       description="Seeded Monte Carlo replications of a simulation model.")
    p.add_argument("--model", type=int, choices=(1, 2, 3), required=True)
    _add_method_flags(p)
    _add_run_flags(p)

    p = sub.add_parser("table1", help="beta_1 component means and SDs for model 1, all methods",
                       description="Means and SDs of the sign-aligned, norm-2 beta_1 estimates.")
    _add_method_flags(p, with_method=False)
    _add_run_flags(p)

    p = sub.add_parser("table2", help="R^2 means and SDs for all models and methods",
                       description="Means and SDs of R^2(beta_j), j = 1..N, for models 1-3.")
    _add_method_flags(p, with_method=False)
    _add_run_flags(p)

    p = sub.add_parser("diagnostics", help="moment and normalisation residuals of the projection kernel",
                       description="Quadrature residuals of int K(x,y)(y-x)^k dy, k=1..3, and |int K - 1|.")
    p.add_argument("--wavelet", default="daubechies2", help="haar or daubechies2")
    p.add_argument("--depth", type=_pos_int, default=DEFAULT_DEPTH)
    p.add_argument("--probes", type=float, nargs="+", default=[0.0, 0.2, 0.5, 0.7])
    p.add_argument("--output", "-o", default=None)
    return parser


def _methods_for(args):
    if getattr(args, "method", None) is None:
        return list(sim.METHODS)
    return [sim.parse_method(args.method)]


def _settings(args, methods) -> sim.MethodSettings:
    names = {m.value for m in methods}
    wavelet = bool(names & {"wavelet-h", "wavelet-d"})
    conflicts = [
        ("--jn", args.jn is not None and not wavelet),
        ("--bn", args.bn is not None and not wavelet),
        ("--depth", args.depth is not None and "wavelet-d" not in names),
        ("--H", args.H is not None and "sir" not in names),
        ("--bandwidth", args.bandwidth is not None and "kernel" not in names),
        ("--kernel-bn", args.kernel_bn is not None and "kernel" not in names),
    ]
    bad = [flag for flag, hit in conflicts if hit]
    if bad:
        raise UsageError(f"{', '.join(bad)} not used by method(s) {sorted(names)}")
    if getattr(args, "plot_script", None) and not getattr(args, "boxplot", None):
        raise UsageError("--plot-script requires --boxplot")
    kw = {"whiten": args.whiten}
    for key, val in (("j_n", args.jn), ("b_n", args.bn), ("depth", args.depth), ("H", args.H),
                     ("bandwidth", args.bandwidth), ("kernel_b_n", args.kernel_bn)):
        if val is not None:
            kw[key] = val
    try:
        return sim.MethodSettings(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_estimate(args, out) -> int:
    method = _methods_for(args)[0] if args.method else sim.Method.WAVELET_H
    settings = _settings(args, [method])
    try:
        sample = read_sample_csv(args.input)
    except FileNotFoundError:
        raise UsageError(f"no such file: {args.input}") from None
    except SampleFormatError as exc:
        raise UsageError(f"{args.input}: {exc}") from None
    if args.n_dirs > sample.d:
        raise UsageError(f"--n-dirs {args.n_dirs} exceeds d={sample.d}")
    if method is sim.Method.SIR and settings.H > sample.n:
        raise UsageError(f"--H {settings.H} exceeds n={sample.n}")
    fit = sim.estimate_edr(sample, method, settings)
    lam = fit.estimate.eigenvalues
    print(f"method: {method.label}   n={sample.n}  d={sample.d}  whiten={settings.whiten}", file=out)
    print("eigenvalues: " + " ".join(f"{v:.6g}" for v in lam), file=out)
    dirs = fit.first(args.n_dirs)
    for j in range(args.n_dirs):
        print(f"beta_{j + 1}: " + " ".join(f"{v: .6f}" for v in dirs[:, j]), file=out)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["kind", "j", "k", "value"])
            for j, v in enumerate(lam, 1):
                w.writerow(["eigenvalue", j, "", repr(float(v))])
            for j in range(args.n_dirs):
                for k, v in enumerate(dirs[:, j], 1):
                    w.writerow(["direction", j + 1, k, repr(float(v))])
            m = fit.estimate.source.m
            for j in range(m.shape[0]):
                for k in range(m.shape[1]):
                    w.writerow(["lambda", j + 1, k + 1, repr(float(m[j, k]))])
    return 0


def _emit(summaries, args, stats):
    if args.output:
        sim.write_results_csv(sim.summarize_tables(summaries, stats), args.output)
    if args.boxplot:
        sim.write_boxplot_csv(summaries, args.boxplot)
    if args.plot_script:
        sim.write_plot_script(args.plot_script, args.boxplot)


def _run(args, models, methods, settings):
    return [sim.run_replications(m, meth, args.n, args.reps, args.seed, settings, args.threads)
            for m in models for meth in methods]


def cmd_simulate(args, out) -> int:
    methods = _methods_for(args)
    settings = _settings(args, methods)
    summaries = _run(args, [args.model], methods, settings)
    for s in summaries:
        print(f"model {s.model}  {s.method.label:<12} R2 mean " + " ".join(f"{v:.4f}" for v in s.r2_means)
              + "  sd " + " ".join(f"{v:.4f}" for v in s.r2_sds), file=out)
    _emit(summaries, args, ("beta_mean", "beta_sd", "r2_mean", "r2_sd", "cos2_mean", "cos2_sd"))
    return 0


def cmd_table1(args, out) -> int:
    methods = list(sim.METHODS)
    settings = _settings(args, methods)
    summaries = _run(args, [1], methods, settings)
    print(f"{'method':<12}" + "".join(f"{'b1' + str(k):>17}" for k in range(1, 6)), file=out)
    for s in summaries:
        cells = [f"{m:.4f} ({sd:.4f})" for m, sd in zip(s.beta_means[:, 0], s.beta_sds[:, 0])]
        print(f"{s.method.label:<12}" + "".join(f"{c:>17}" for c in cells), file=out)
    _emit(summaries, args, ("beta_mean", "beta_sd"))
    return 0


def cmd_table2(args, out) -> int:
    methods = list(sim.METHODS)
    settings = _settings(args, methods)
    summaries = _run(args, [1, 2, 3], methods, settings)
    for s in summaries:
        cells = [f"R2(b{j + 1}) {m:.4f} ({sd:.4f})" for j, (m, sd) in enumerate(zip(s.r2_means, s.r2_sds))]
        print(f"model {s.model}  {s.method.label:<12} " + "   ".join(cells), file=out)
    _emit(summaries, args, ("r2_mean", "r2_sd"))
    return 0


def cmd_diagnostics(args, out) -> int:
    try:
        w = build_wavelet(args.wavelet, args.depth)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    diag = kernel_diagnostics(w, args.probes)
    print(f"{'x':>8} {'moment1':>12} {'moment2':>12} {'moment3':>12} {'|intK-1|':>12}", file=out)
    rows = list(diag.as_rows())
    for r in rows:
        print(f"{r['x']:8.4f} {r['m1']:12.6f} {r['m2']:12.6f} {r['m3']:12.6f} {r['norm']:12.3e}", file=out)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            wr = csv.DictWriter(fh, fieldnames=["x", "m1", "m2", "m3", "norm"], lineterminator="\n")
            wr.writeheader()
            wr.writerows({k: repr(v) for k, v in r.items()} for r in rows)
    return 0


COMMANDS = {"estimate": cmd_estimate, "simulate": cmd_simulate, "table1": cmd_table1,
            "table2": cmd_table2, "diagnostics": cmd_diagnostics}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "method", None) is not None:
            sim.parse_method(args.method)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"wavedr {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"wavedr {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
