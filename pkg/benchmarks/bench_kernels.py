"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 250 500 1000] [--repeat 5]
"""
import argparse
import time

import numpy as np

from wavedr._backend import available_backends
from wavedr.baselines import KernelConfig, kernel_lambda
from wavedr.estimators import EstimatorConfig, lambda_hat
from wavedr.simulation import generate
from wavedr.wavelets import build_wavelet


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[250, 500, 1000])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = available_backends()
    haar, d2 = build_wavelet("haar"), build_wavelet("daubechies2")
    cases = {
        "lambda haar": lambda s, b: lambda_hat(s, EstimatorConfig(0, 0.01, haar), backend=b),
        "lambda haar bucket": lambda s, b: lambda_hat(s, EstimatorConfig(0, 0.01, haar), "bucket", b),
        "lambda daub2": lambda s, b: lambda_hat(s, EstimatorConfig(0, 0.01, d2), backend=b),
        "lambda kernel": lambda s, b: kernel_lambda(s, KernelConfig.default_for(s.n), b),
    }
    print(f"{'case':<20}{'n':>6}" + "".join(f"{b + ' ms':>14}" for b in backends)
          + ("   speedup" if len(backends) > 1 else ""))
    for name, fn in cases.items():
        for n in args.n:
            s = generate(2, n, 0)
            ms = [1e3 * best_of(lambda: fn(s, b), args.repeat) for b in backends]
            if len(backends) > 1:
                a, b = (fn(s, k).m for k in backends)
                assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.abs(a).max())
            line = f"{name:<20}{n:>6}" + "".join(f"{t:14.2f}" for t in ms)
            if len(ms) > 1:
                line += f"{ms[1] / ms[0]:10.1f}x"
            print(line)


if __name__ == "__main__":
    main()
