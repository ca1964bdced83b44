"""Benchmark the compiled event-window kernels against the NumPy fallback.

Times window_stats, omori_stats, and bootstrap_stats on a synthetic
minute-scale workload and reports the speedup of the compiled extension
over the pure-Python backend, after checking that both agree.

Usage:
    python benchmarks/bench_kernels.py [--bars N] [--t-max T] [--boot B]
"""

import argparse
import time

import numpy as np

from remvol import _kernels_py

try:
    from remvol import _kernels as _compiled
except ImportError:
    _compiled = None


def make_workload(n_bars, zeta, seed=0):
    rng = np.random.default_rng(seed)
    values = np.abs(rng.standard_normal(n_bars))
    included = rng.random(n_bars) >= 0.05
    sigma = values[included].mean()
    events = np.flatnonzero(included & (values > zeta * sigma))
    return values, included.astype(np.uint8), events.astype(np.int64)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def check_close(a, b):
    for x, y in zip(a, b):
        np.testing.assert_allclose(np.asarray(x, dtype=np.float64),
                                   np.asarray(y, dtype=np.float64),
                                   rtol=1e-12, atol=1e-9)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bars", type=int, default=1_000_000,
                    help="series length in bars (default 1e6)")
    ap.add_argument("--t-max", type=int, default=500,
                    help="window length in lags (default 500)")
    ap.add_argument("--boot", type=int, default=20,
                    help="bootstrap replicates (default 20)")
    ap.add_argument("--repeat", type=int, default=3,
                    help="timing repeats, best-of (default 3)")
    args = ap.parse_args(argv)

    if _compiled is None:
        ap.exit(1, "compiled extension not available; nothing to compare\n")

    values, included, events = make_workload(args.bars, zeta=2.0)
    m = min(events.size, 20_000)
    ev_boot = events[:m]
    rng = np.random.default_rng(1)
    weights = np.zeros((args.boot, m))
    for i in range(args.boot):
        weights[i] = np.bincount(rng.integers(0, m, m), minlength=m)

    print(f"bars={args.bars}  events={events.size}  t_max={args.t_max}  "
          f"boot={args.boot}x{m}")
    print(f"{'kernel':<16} {'python':>10} {'compiled':>10} {'speedup':>8}")

    cases = [
        ("window_stats",
         lambda k: k.window_stats(values, included, events, 1, args.t_max)),
        ("omori_stats",
         lambda k: k.omori_stats(values, included, events, 1, args.t_max, 1.5)),
        ("bootstrap_stats",
         lambda k: k.bootstrap_stats(values, included, ev_boot, 1,
                                     args.t_max, weights)),
    ]
    for name, call in cases:
        t_py, out_py = best_of(lambda: call(_kernels_py), args.repeat)
        t_cy, out_cy = best_of(lambda: call(_compiled), args.repeat)
        check_close(out_py, out_cy)
        print(f"{name:<16} {t_py:>9.3f}s {t_cy:>9.3f}s {t_py / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
