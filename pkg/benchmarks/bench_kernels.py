"""Compare the numba kernels with their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel is warmed up once (JIT compilation is excluded) and then timed
as the best of N runs.  The two backends must also agree numerically.
"""

import argparse
import time

import numpy as np

from boxrobust import _kernels
from boxrobust.constructions import pr_box, random_wiring
from boxrobust.correlations import CHSH_SCENARIO
from boxrobust.sampling import random_hermitian


def cases(rng):
    w = random_wiring(CHSH_SCENARIO, rng=rng)
    M = np.stack([np.stack([random_hermitian(4, rng) for _ in range(3)]) for _ in range(3)])
    return {
        "eigh 16x16": (_kernels.eigh, (random_hermitian(16, rng),)),
        "eigh 64x64": (_kernels.eigh, (random_hermitian(64, rng),)),
        "trace_norms 1000 x 8x8": (_kernels.trace_norms, (np.stack([random_hermitian(8, rng) for _ in range(1000)]),)),
        "trace_norms 1000 x 16x16": (_kernels.trace_norms, (np.stack([random_hermitian(16, rng) for _ in range(1000)]),)),
        "born 4x4 (3,3,3,3)": (_kernels.born, (random_hermitian(16, rng), (4, 4), M, M)),
        "vertex_matrix (4,4,3,3)": (_kernels.vertex_matrix, (4, 4, 3, 3)),
        "wire PR": (_kernels.wire, (pr_box().p, w.side_table(), w.alice_pre, w.alice_post, w.bob_pre, w.bob_post)),
    }


def best_of(fn, args, repeat):
    fn(*args)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def max_diff(a, b):
    if isinstance(a, tuple):  # eigh: compare eigenvalues only (vectors carry phases)
        a, b = a[0], b[0]
    return float(np.abs(np.asarray(a) - np.asarray(b)).max())


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not _kernels.NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")

    prev = _kernels.backend()
    print(f"{'kernel':28s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s} {'max diff':>10s}")
    try:
        for name, (fn, fargs) in cases(np.random.default_rng(0)).items():
            timings, results = {}, {}
            for b in ("numba", "numpy"):
                _kernels.set_backend(b)
                timings[b] = best_of(fn, fargs, args.repeat)
                results[b] = fn(*fargs)
            speedup = timings["numpy"] / timings["numba"]
            diff = max_diff(results["numba"], results["numpy"])
            print(f"{name:28s} {1e3 * timings['numba']:11.3f} {1e3 * timings['numpy']:11.3f} {speedup:8.2f} {diff:10.1e}")
    finally:
        _kernels.set_backend(prev)


if __name__ == "__main__":
    main()
