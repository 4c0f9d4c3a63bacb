"""Compare the numba kernels with the pure-numpy fallback.

Part one times each kernel in process on jet-shaped arrays.  Part two runs a
whole suite in subprocesses with ``HKTLAB_NUMBA`` set to 1 and to 0.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--geometry hopf-hkt:n=2]
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from hktlab import _kernels


def kernel_cases(rng):
    d = 8
    return {
        "alt_sum k=3 (8,8,8,8)": (lambda t: _kernels.alt_sum(t, 3), lambda t: _kernels._alt_sum_numpy(t, 3),
                                  rng.normal(size=(d, d, d, d))),
        "alt_sum k=4 (8,8,8,8)": (lambda t: _kernels.alt_sum(t, 4), lambda t: _kernels._alt_sum_numpy(t, 4),
                                  rng.normal(size=(d, d, d, d))),
        "outer3 (8,8,8)": (_kernels.outer3, _kernels._outer3_numpy, rng.normal(size=(d, d, d))),
        "hess_grad_sym (8,8,8,8)": (
            lambda a: _kernels.hess_grad_sym(a[0], a[1]),
            lambda a: _kernels._hess_grad_sym_numpy(a[0], a[1]),
            (rng.normal(size=(d, d, d, d)), rng.normal(size=(d, d, d))),
        ),
    }


def bench_kernels(repeat: int) -> None:
    if not _kernels.USE_NUMBA:
        print("numba path disabled in this process; skipping kernel timings")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':<26}{'numba us':>12}{'numpy us':>12}{'speedup':>10}")
    for name, (fast, slow, arg) in kernel_cases(rng).items():
        np.testing.assert_allclose(fast(arg), slow(arg), atol=1e-12)  # also triggers compilation
        n = 200
        t_fast = min(timeit.repeat(lambda: fast(arg), number=n, repeat=repeat)) / n * 1e6
        t_slow = min(timeit.repeat(lambda: slow(arg), number=n, repeat=repeat)) / n * 1e6
        print(f"{name:<26}{t_fast:>12.1f}{t_slow:>12.1f}{t_slow / t_fast:>10.2f}")


def bench_suite(geometry: str, points: int) -> None:
    print(f"\nhktlab run --geometry {geometry} --points {points} (wall time incl. import and jit)")
    for flag in ("1", "0"):
        env = dict(os.environ, HKTLAB_NUMBA=flag)
        cmd = [sys.executable, "-m", "hktlab", "run", "--geometry", geometry, "--points", str(points)]
        start = time.perf_counter()
        proc = subprocess.run(cmd, env=env, capture_output=True, text=True)
        wall = time.perf_counter() - start
        print(f"  HKTLAB_NUMBA={flag}: {wall:6.2f} s, {proc.stdout.strip().splitlines()[-1]}")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--geometry", default="hopf-hkt:n=2")
    p.add_argument("--points", type=int, default=100)
    args = p.parse_args()
    bench_kernels(args.repeat)
    bench_suite(args.geometry, args.points)


if __name__ == "__main__":
    main()
