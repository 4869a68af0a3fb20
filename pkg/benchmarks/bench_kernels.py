"""Benchmark the compiled vote kernels against the numpy fallback.

Two comparisons: the raw kernel functions on synthetic arrays, and one
end-to-end valuation run per backend. The backend is chosen at import time,
so the end-to-end half re-launches this script in a subprocess with
SHAPREUSE_PURE=1 to force the fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeats 5] [--seed 0]
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np


def best_of(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def raw_inputs(rng, m: int, num_tests: int, dim: int):
    coal_x = np.ascontiguousarray(rng.normal(size=(m, dim)))
    coal_y = rng.integers(0, 3, size=m).astype(np.int64)
    test_x = np.ascontiguousarray(rng.normal(size=(num_tests, dim)))
    mask = (rng.random((num_tests, m)) < 0.8).astype(np.uint8)
    return coal_x, coal_y, test_x, mask


def bench_raw(repeats: int, seed: int) -> None:
    from shapreuse._kernels import fallback

    try:
        from shapreuse._kernels import _speedups
    except ImportError:
        print("compiled extension not built; raw comparison skipped")
        return

    rng = np.random.default_rng(seed)
    shapes = [(50, 20, 4), (200, 100, 8), (800, 300, 16)]
    print(f"raw kernels, best of {repeats} (milliseconds)")
    print(f"{'kernel':<14}{'m':>6}{'tests':>7}{'dim':>5}"
          f"{'python':>10}{'compiled':>10}{'speedup':>9}")
    for m, num_tests, dim in shapes:
        coal_x, coal_y, test_x, mask = raw_inputs(rng, m, num_tests, dim)
        pairs = [
            ("wknn_votes",
             lambda: fallback.wknn_votes(coal_x, coal_y, test_x, mask, 5, 3),
             lambda: _speedups.wknn_votes(coal_x, coal_y, test_x, mask, 5, 3)),
            ("kernel_votes",
             lambda: fallback.kernel_votes(coal_x, coal_y, test_x, 0.5, 0.01, 3),
             lambda: _speedups.kernel_votes(coal_x, coal_y, test_x, 0.5, 0.01, 3)),
        ]
        for name, slow, fast in pairs:
            if not np.allclose(slow(), fast(), atol=1e-10):
                raise SystemExit(f"{name}: backends disagree at m={m}")
            t_py = best_of(slow, repeats) * 1e3
            t_c = best_of(fast, repeats) * 1e3
            print(f"{name:<14}{m:>6}{num_tests:>7}{dim:>5}"
                  f"{t_py:>10.3f}{t_c:>10.3f}{t_py / t_c:>8.1f}x")


def run_once(seed: int) -> None:
    """Child mode: one valuation run on the current backend."""
    from shapreuse import ModelOracle, UtilityCache, lsmr, make_family
    from shapreuse._kernels import BACKEND
    from shapreuse.data import generate_synthetic

    ds, tests = generate_synthetic(num_classes=3, per_class=40,
                                   test_per_class=10, dim=6, noise=1.0,
                                   seed=seed)
    family = make_family("wknn", k=3)
    supports = family.support_map(ds, tests)
    oracle = ModelOracle(family, ds, tests, cache=UtilityCache(1.0))
    start = time.perf_counter()
    result = lsmr(ds, tests, supports, oracle)
    seconds = time.perf_counter() - start
    print(f"{seconds:.6f} {result.trainings} {BACKEND}")


def bench_end_to_end(seed: int) -> None:
    print()
    print("end-to-end exact valuation (wknn k=3, 120 train / 30 test)")
    print(f"{'backend':<10}{'seconds':>10}{'fits':>8}")
    rows = {}
    for label, pure in (("python", True), ("compiled", False)):
        env = dict(os.environ)
        if pure:
            env["SHAPREUSE_PURE"] = "1"
        else:
            env.pop("SHAPREUSE_PURE", None)
        out = subprocess.run(
            [sys.executable, __file__, "--once", "--seed", str(seed)],
            env=env, capture_output=True, text=True, check=True)
        seconds, fits, backend = out.stdout.split()
        if backend != label:
            print(f"{label:<10} unavailable (backend resolved to {backend})")
            continue
        rows[label] = float(seconds)
        print(f"{label:<10}{float(seconds):>10.3f}{fits:>8}")
    if len(rows) == 2:
        print(f"speedup: {rows['python'] / rows['compiled']:.1f}x")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--once", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()
    if args.once:
        run_once(args.seed)
        return
    bench_raw(args.repeats, args.seed)
    bench_end_to_end(args.seed)


if __name__ == "__main__":
    main()
