"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs once untimed to trigger compilation, then the best of
``--repeat`` runs is reported. Outputs of the two backends are compared too.
"""
import argparse
from timeit import default_timer as timer

import numpy as np

from teugels.cumulant_poly import gamma
from teugels.kernels import numba_impl, numpy_impl


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = timer()
        fn()
        times.append(timer() - t0)
    return min(times)


def cases():
    keys = numpy_impl.stream_keys(1, np.arange(100_000), 0)
    exps, coefs = gamma(8).to_arrays(8)
    pts = np.random.default_rng(0).normal(size=(200_000, 8))
    rows = np.repeat(np.arange(4096), 8)
    cols = np.random.default_rng(1).integers(0, 1025, rows.size)
    w = np.ones(rows.size)
    return {
        "uniforms 1e5 x 64": lambda m: m.uniforms(keys, 0, 64),
        "normals 1e5 x 32": lambda m: m.normals(keys, 32),
        "poisson_levels 1e5, total 4": lambda m: m.poisson_levels(keys, 4.0),
        "poly_eval gamma_8 at 2e5 points": lambda m: m.poly_eval(exps, coefs, pts),
        "grid_accumulate 4096 x 1025": lambda m: m.grid_accumulate(rows, cols, w, 4096, 1025),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if numba_impl is None:
        raise SystemExit("numba backend unavailable (TEUGELS_NO_NUMBA set or numba missing)")
    print(f"{'kernel':<34} {'numpy [ms]':>11} {'numba [ms]':>11} {'speedup':>8}  agree")
    for name, fn in cases().items():
        a, b = fn(numpy_impl), fn(numba_impl)
        a, b = (a if isinstance(a, tuple) else (a,)), (b if isinstance(b, tuple) else (b,))
        agree = all(np.allclose(x, y, rtol=1e-12, atol=1e-12) for x, y in zip(a, b))
        t_np = best_of(lambda: fn(numpy_impl), args.repeat)
        t_nb = best_of(lambda: fn(numba_impl), args.repeat)
        print(f"{name:<34} {1e3 * t_np:>11.2f} {1e3 * t_nb:>11.2f} {t_np / t_nb:>8.1f}  {agree}")


if __name__ == "__main__":
    main()
