"""Compare the compiled and pure-Python three-level sweeps.

Usage: ``python benchmarks/bench_kernels.py [--repeat N]``.
Times a raw sweep on random diagonally dominant tridiagonals and a full
adjoint solve on a moving interval for several grid sizes.
"""
import argparse
import timeit

import numpy as np

from movingwave import kernels
from movingwave.geometry import MovingDomain
from movingwave.wavesolver import CoefficientSet, GridSpec, solve_adjoint


def random_problem(nsteps, m, seed=0):
    rng = np.random.default_rng(seed)
    new = rng.normal(size=(nsteps, 3, m)) * 0.1
    new[:, 1] += 2.0
    cur = rng.normal(size=(nsteps, 3, m)) * 0.1
    old = rng.normal(size=(nsteps, 3, m)) * 0.1
    src = rng.normal(size=(nsteps, m)) * 1e-3
    return new, cur, old, src


def bench_sweep(backend, nsteps, m, repeat):
    new, cur, old, src = random_problem(nsteps, m)
    fn = kernels.BACKENDS[backend]

    def go():
        out = np.zeros((nsteps + 2, m))
        fn(new, cur, old, src, out, 1e300)

    return min(timeit.repeat(go, number=1, repeat=repeat))


def bench_solve(backend, nx, repeat):
    dom = MovingDomain.interval("0", "1 + 0.25*t", 0.0, 2.0)
    grid = GridSpec(nx, 4 * nx, 0.0, 2.0)
    data = ("sin(pi*x)", "0")

    def go():
        solve_adjoint(dom, CoefficientSet(), grid, data, backend=backend)

    return min(timeit.repeat(go, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = sorted(kernels.BACKENDS)
    print(f"default backend: {kernels.BACKEND}; available: {', '.join(backends)}")
    print(f"{'case':<28}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    rows = [(f"sweep {n}x{m}", lambda b, n=n, m=m: bench_sweep(b, n, m, args.repeat))
            for n, m in ((400, 100), (1600, 400), (800, 3200))]
    rows += [(f"adjoint solve Nx={nx}", lambda b, nx=nx: bench_solve(b, nx, args.repeat))
             for nx in (100, 200, 400)]
    for name, fn in rows:
        times = {b: fn(b) for b in backends}
        speed = (times["python"] / times["cython"]) if "cython" in times else float("nan")
        print(f"{name:<28}" + "".join(f"{times[b]:>11.4f}s" for b in backends)
              + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
