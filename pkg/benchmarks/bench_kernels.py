"""Timing comparison of the compiled and pure kernel backends.

Runs every scalar cube reduction at a few dimensions on both backends and
prints per-call times with the speedup ratio. Usage:

    python3 benchmarks/bench_kernels.py [--dims 10,14,18] [--repeats 5]

The table kernels (dot/parity tables, Walsh-Hadamard) are shared NumPy code
paths, so only the scalar reductions appear here.
"""

import argparse
import timeit

import numpy as np

from paritylab.backend import K, available_backends, set_backend


def _cases(d):
    g = np.random.default_rng(d)
    w = g.standard_normal(d)
    b = float(g.standard_normal())
    s_bits = (1 << (d // 2)) - 1
    return {
        "threshold_parity_mean": lambda: K.threshold_parity_mean(w, b, s_bits),
        "indicator_parity_moments": lambda: K.indicator_parity_moments(w, b, s_bits),
        "relu_parity_mean": lambda: K.relu_parity_mean(w, b, s_bits),
        "relu_moments": lambda: K.relu_moments(w, b),
        "relu_sq_mean": lambda: K.relu_sq_mean(w, b),
        "single_sq_loss": lambda: K.single_sq_loss(1.0, w, b, s_bits),
    }


def _per_call(fn, repeats):
    # one warmup call, then the best of `repeats` timed batches
    fn()
    number = max(1, int(0.02 / max(timeit.timeit(fn, number=1), 1e-9)))
    return min(timeit.repeat(fn, number=number, repeat=repeats)) / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dims", default="10,14,18", help="comma-separated dimensions")
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats per case")
    args = parser.parse_args()
    dims = [int(tok) for tok in args.dims.split(",")]

    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    if "compiled" not in backends:
        print("compiled extension not built; timing the pure backend only")

    header = f"{'kernel':28s} {'d':>3s} " + " ".join(f"{b:>12s}" for b in backends)
    if len(backends) == 2:
        header += f" {'speedup':>9s}"
    print(header)
    print("-" * len(header))

    for d in dims:
        cases = _cases(d)
        for name, fn in cases.items():
            times = {}
            for backend in backends:
                prev = set_backend(backend)
                try:
                    times[backend] = _per_call(fn, args.repeats)
                finally:
                    set_backend(prev)
            row = f"{name:28s} {d:3d} " + " ".join(
                f"{times[b] * 1e6:10.1f}us" for b in backends
            )
            if len(backends) == 2:
                row += f" {times['pure'] / times['compiled']:8.1f}x"
            print(row)


if __name__ == "__main__":
    main()
