"""Compare the numba kernels with their pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--n 100000] [--repeat 5]

Part one times each kernel pair directly on the same arrays and checks the
results agree bitwise. Part two solves the four shipped scenarios end to end
in a fresh interpreter per backend (``VATSIM_DISABLE_NUMBA=1`` for numpy).
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from vatsim import kernels

SOLVE_SNIPPET = """
import time
from vatsim import kernels
from vatsim.microdata import generate_synthetic
from vatsim.reform import BUILTIN_SCENARIOS, baseline_revenue, builtin_scenario, run_scenario
ds = generate_synthetic({n}, 1)
target = baseline_revenue(ds)
run_scenario(ds, builtin_scenario("reform1"), target=target)
t0 = time.perf_counter()
for name in BUILTIN_SCENARIOS:
    run_scenario(ds, builtin_scenario(name), target=target)
print(kernels.BACKEND, time.perf_counter() - t0)
"""


def best_of(fn, repeat):
    fn()  # compile / warm
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100_000, help="households")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not kernels.HAVE_NUMBA:
        sys.exit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    n, per = args.n, 27
    y = rng.lognormal(6, 1, n)
    ws = rng.uniform(1, 50, n)
    order = np.argsort(y)
    ys, ps = y[order], (ws / ws.sum())[order]
    ptr = np.arange(0, n * per + 1, per, dtype=np.int64)
    cls = rng.integers(-1, 7, n * per).astype(np.int64)
    vals = rng.uniform(0, 100, n * per)

    cases = [
        ("seq_sum", lambda: kernels.nb_seq_sum(vals), lambda: kernels.np_seq_sum(vals)),
        ("fgt_sums a=2", lambda: kernels.nb_fgt_sums(y, ws, 420.0, 2), lambda: kernels.np_fgt_sums(y, ws, 420.0, 2)),
        ("gini_sorted", lambda: kernels.nb_gini_sorted(ys, ps), lambda: kernels.np_gini_sorted(ys, ps)),
        (
            "segment_class_sum",
            lambda: kernels.nb_segment_class_sum(ptr, cls, vals, 7),
            lambda: kernels.np_segment_class_sum(ptr, cls, vals, 7),
        ),
    ]
    print(f"kernels ({n} households, {n * per} rows), best of {args.repeat}")
    print(f"{'kernel':<20}{'numba ms':>10}{'numpy ms':>10}{'speedup':>9}  bitwise")
    for name, f_nb, f_np in cases:
        t_nb, t_np = best_of(f_nb, args.repeat), best_of(f_np, args.repeat)
        same = np.array_equal(np.asarray(f_nb()), np.asarray(f_np()))
        print(f"{name:<20}{t_nb * 1e3:>10.2f}{t_np * 1e3:>10.2f}{t_np / t_nb:>8.1f}x  {same}")

    print(f"\nsolve reform1-4 end to end ({n} households)")
    for flag in ("0", "1"):
        env = dict(os.environ, VATSIM_DISABLE_NUMBA=flag)
        out = subprocess.run(
            [sys.executable, "-c", SOLVE_SNIPPET.format(n=n)], env=env, capture_output=True, text=True, check=True
        )
        backend, secs = out.stdout.split()
        print(f"  {backend:<6} {float(secs):.3f}s")


if __name__ == "__main__":
    main()
