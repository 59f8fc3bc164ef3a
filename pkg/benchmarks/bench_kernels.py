"""Time the numba kernels against their numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--json]
"""
import argparse
import json
import time

import numpy as np

from properclock import kernels


def _cases(rng):
    t = rng.uniform(-1e5, 1e5, 2000)
    tau_a = rng.uniform(-3e4, 3e4, 41)
    rate = np.ascontiguousarray(rng.uniform(0, 1e-3, (512, 150)))
    coeffs = rng.normal(size=150) + 1j * rng.normal(size=150)
    basis = np.ascontiguousarray(np.exp(1j * rng.uniform(0, 6, (150, 41))))
    w = rng.uniform(0, 1, 512)
    t_small = rng.uniform(-1e5, 1e5, 15)
    vec = np.ascontiguousarray(rng.normal(size=(2048, 150)) + 1j * rng.normal(size=(2048, 150)))
    w2 = rng.uniform(0, 1, 2048)
    return {
        "leading_order_terms": (t, tau_a, 2e4, 1e4),
        "spectral_clock_density": (rate, coeffs, basis, w, t_small),
        "mixture_density_matrix": (vec, w2),
    }


def _best(fn, args, repeat):
    fn(*args)  # warm-up (triggers compilation for numba)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    results = []
    for name, case in _cases(rng).items():
        t_np = _best(kernels.NUMPY_KERNELS[name], case, args.repeat)
        t_nb = _best(kernels.NUMBA_KERNELS[name], case, args.repeat)
        same = np.allclose(kernels.NUMPY_KERNELS[name](*case), kernels.NUMBA_KERNELS[name](*case), rtol=1e-11)
        results.append({"kernel": name, "numpy_s": t_np, "numba_s": t_nb, "speedup": t_np / t_nb, "agree": bool(same)})
    if args.json:
        print(json.dumps(results, indent=2))
        return
    print(f"{'kernel':26s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}  agree")
    for r in results:
        print(f"{r['kernel']:26s} {1e3 * r['numpy_s']:11.3f} {1e3 * r['numba_s']:11.3f} {r['speedup']:8.2f}  {r['agree']}")


if __name__ == "__main__":
    main()
