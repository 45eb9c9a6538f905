"""Compare the compiled and pure-Python least-squares kernels.

Usage::

    python3 benchmarks/benchmark_backends.py [--repeats 200]

Times the ``ols_sandwich`` hot kernel across problem sizes and a small
end-to-end simulation study, and verifies that both backends agree
numerically on every timed problem.
"""

import argparse
import time

import numpy as np

from impactreg import SimConfig, run_study
from impactreg.backend import get_backend


def make_problem(seed, n, p):
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.standard_normal((n, p - 1))])
    y = X @ rng.standard_normal(p) + rng.standard_normal(n)
    return np.ascontiguousarray(X), np.ascontiguousarray(y)


def time_kernel(kernel, problems, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for X, y in problems:
            kernel.ols_sandwich(X, y, 1e-10, False)
        best = min(best, time.perf_counter() - t0)
    return best / len(problems)


def check_agreement(problems):
    compiled = get_backend("compiled")
    python = get_backend("python")
    worst = 0.0
    for X, y in problems:
        out_c = compiled.ols_sandwich(X, y, 1e-10, False)
        out_p = python.ols_sandwich(X, y, 1e-10, False)
        for a, b in zip(out_c[:5], out_p[:5]):
            scale = np.abs(b).max() + 1e-300
            worst = max(worst, float(np.abs(a - b).max() / scale))
    return worst


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    try:
        compiled = get_backend("compiled")
    except ImportError:
        print("compiled backend not built; nothing to compare")
        return
    python = get_backend("python")

    print(f"{'n':>7} {'p':>4} {'compiled':>12} {'python':>12} "
          f"{'speedup':>8} {'max rel gap':>12}")
    for n, p in [(50, 3), (500, 6), (500, 11), (5000, 6), (5000, 21),
                 (50_000, 11)]:
        problems = [make_problem(s, n, p) for s in range(5)]
        repeats = max(1, args.repeats // max(1, n // 500))
        t_c = time_kernel(compiled, problems, repeats)
        t_p = time_kernel(python, problems, repeats)
        gap = check_agreement(problems)
        print(f"{n:>7} {p:>4} {t_c * 1e6:>10.1f}us {t_p * 1e6:>10.1f}us "
              f"{t_p / t_c:>7.2f}x {gap:>12.2e}")

    print("\nend-to-end simulation study (m=5, k=4, n=500, 500 reps):")
    import impactreg.backend as backend
    cfg = SimConfig(m=5, k=4, n=500, replications=500, seed=0)
    results = {}
    for name in ("compiled", "python"):
        backend.ols_sandwich = get_backend(name).ols_sandwich
        t0 = time.perf_counter()
        report = run_study(cfg)
        results[name] = report.as_dict(include_elapsed=False)
        print(f"  {name:>8}: {time.perf_counter() - t0:.2f}s")
    backend.ols_sandwich = compiled.ols_sandwich
    same = results["compiled"] == results["python"]
    print(f"  reports identical across backends: {same}")


if __name__ == "__main__":
    main()
