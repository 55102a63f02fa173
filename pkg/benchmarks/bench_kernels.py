"""Compiled vs pure-Python simplex kernels.

Two parts: per-kernel micro timings on random data of simplex-like shape, and
end-to-end sizing LP solves on the synthetic fixture with each backend. The
solves must agree on the objective. Iteration counts can differ by a pivot
or two on long horizons because the compiled loops sum in a different order
than numpy, which can flip a near-tie in a ratio test.

    python benchmarks/bench_kernels.py --hours 168 720 2190
"""
import argparse
import sys
import time

import numpy as np

from hybridsizing.model import ScenarioConfig, build_lp
from hybridsizing.solver import SimplexOptions, solve_lp
from hybridsizing.solver import _kernels_py as pyk
from hybridsizing.solver.kernels import compiled_available, get_kernels
from hybridsizing.synthetic import resource_fixture
from hybridsizing.timeseries import baseload_profile


def _eta_file(rng, m, count, nnz):
    piv = rng.integers(0, m, count).astype(np.int64)
    pval = rng.uniform(0.5, 2.0, count)
    start = np.arange(0, (count + 1) * nnz, nnz, dtype=np.int64)
    idx = np.empty(count * nnz, dtype=np.int64)
    for k in range(count):
        pool = np.delete(np.arange(m), piv[k])
        idx[k * nnz:(k + 1) * nnz] = rng.choice(pool, nnz, replace=False)
    val = rng.normal(0.0, 0.1, count * nnz)
    return piv, pval, start, idx, val


def _cases(rng, m, n):
    piv, pval, start, idx, val = _eta_file(rng, m, 100, 8)
    x = rng.normal(size=m)
    xb = rng.normal(size=m)
    lob = np.where(rng.random(m) < 0.8, -1.0, -np.inf)
    hib = np.where(rng.random(m) < 0.8, 1.0, np.inf)
    w = rng.uniform(0.5, 2.0, m)
    head = rng.permutation(n)[:m].astype(np.int64)
    d = rng.normal(size=n)
    alpha_n = rng.normal(size=n)
    status = rng.choice(np.array([pyk.AT_LOWER, pyk.AT_UPPER, pyk.FREE, pyk.BASIC],
                                 dtype=np.int8), n)
    alpha_m = rng.normal(size=m)
    tau = rng.normal(size=m)
    return {
        "eta_ftran": lambda k: k.eta_ftran(x.copy(), piv, pval, start, idx, val, 100),
        "eta_btran": lambda k: k.eta_btran(x.copy(), piv, pval, start, idx, val, 100),
        "dual_chuzr": lambda k: k.dual_chuzr(xb, lob, hib, w, 1e-9),
        "dual_ratio": lambda k: k.dual_ratio(d, alpha_n, status, 1.0, 1e-7, 1e-9, False),
        "dse_update": lambda k: k.dse_update(w.copy(), alpha_m, tau, 3, 1.5),
        "update_duals": lambda k: k.update_duals(d.copy(), alpha_n, status, 0.01),
        "primal_ratio": lambda k: k.primal_ratio(xb, lob, hib, alpha_m, 1.0, 1e-7, 1e-9,
                                                 False, head),
        "primal_price": lambda k: k.primal_price(d, status, 1e-9, False),
    }


def _best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def micro(m, n, repeat):
    rng = np.random.default_rng(0)
    cases = _cases(rng, m, n)
    comp = get_kernels("compiled")
    print(f"kernel micro timings, m={m} n={n} (best of {repeat}, microseconds)")
    print(f"{'kernel':<14}{'python':>12}{'compiled':>12}{'speedup':>10}")
    for name, call in cases.items():
        tp = _best_of(lambda: call(pyk), repeat) * 1e6
        tc = _best_of(lambda: call(comp), repeat) * 1e6
        print(f"{name:<14}{tp:>12.1f}{tc:>12.1f}{tp / tc:>10.2f}")


def end_to_end(hours_list):
    print("\nsizing LP, baseload 100 MW on the synthetic fixture")
    print(f"{'hours':>6}{'python s':>11}{'compiled s':>12}{'speedup':>9}{'iters':>13}  objective")
    res = resource_fixture(1, seed=0)
    for T in hours_list:
        P = build_lp(res.window(0, T), baseload_profile(100.0, T), ScenarioConfig())
        out = {}
        for name in ("python", "compiled"):
            t0 = time.perf_counter()
            sol = solve_lp(P, options=SimplexOptions(kernels=name))
            out[name] = (time.perf_counter() - t0, sol)
        (tp, sp_), (tc, sc) = out["python"], out["compiled"]
        same = abs(sp_.objective - sc.objective) <= 1e-9 * abs(sc.objective)
        iters = f"{sp_.iterations}/{sc.iterations}"
        print(f"{T:>6}{tp:>11.2f}{tc:>12.2f}{tp / tc:>9.2f}{iters:>13}  "
              f"{'match' if same else 'DIFFER'} ({sc.objective:.6f})")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--hours", type=int, nargs="*", default=[168, 720, 2190])
    ap.add_argument("--rows", type=int, default=20000)
    ap.add_argument("--cols", type=int, default=60000)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    if not compiled_available():
        print("compiled kernels are not built; run `pip install -e .` first")
        return 1
    micro(args.rows, args.cols, args.repeat)
    if args.hours:
        end_to_end(args.hours)
    return 0


if __name__ == "__main__":
    sys.exit(main())
