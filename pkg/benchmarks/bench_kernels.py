#!/usr/bin/env python3
"""Benchmark the window-counting kernel: compiled backend vs numpy fallback.

The counting kernel dominates every Monte-Carlo experiment, so this is the
number that decides sweep runtimes.  Both paths are run on identical
inputs and checked for exact agreement.

Usage:
    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --sizes 500,1000,4000 --widths 51 --csv out.csv
"""

import argparse
import csv
import sys
import time

import numpy as np

from ensest._kernels import BACKEND, _window_counts_numpy, window_counts


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="500,1000,2000,4000",
                        help="comma-separated N (=M) values")
    parser.add_argument("--dim", type=int, default=6)
    parser.add_argument("--widths", type=int, default=51,
                        help="number of window sizes per query")
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--csv", default=None, help="optional CSV output path")
    args = parser.parse_args(argv)

    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(0)
    rows = []
    print(f"active backend: {BACKEND}")
    print(f"{'N=M':>6} {'compiled (s)':>13} {'numpy (s)':>10} {'speedup':>8}  agree")
    for n in sizes:
        eval_pts = rng.random((n, args.dim))
        data = rng.random((n, args.dim))
        hw = np.sort(rng.uniform(0.01, 0.45, args.widths))
        window_counts(eval_pts, data, hw)  # warm the JIT outside the timing
        t_active = time_call(lambda: window_counts(eval_pts, data, hw), args.repeats)
        t_numpy = time_call(lambda: _window_counts_numpy(eval_pts, data, hw),
                            args.repeats)
        agree = bool(np.array_equal(window_counts(eval_pts, data, hw),
                                    _window_counts_numpy(eval_pts, data, hw)))
        print(f"{n:>6} {t_active:>13.4f} {t_numpy:>10.4f} {t_numpy / t_active:>8.2f}  {agree}")
        rows.append({"n": n, "d": args.dim, "widths": args.widths,
                     "backend": BACKEND, "t_active": t_active, "t_numpy": t_numpy,
                     "speedup": t_numpy / t_active, "agree": agree})
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
