"""Compare the compiled and numpy evaluation kernels on fitness-sized workloads.

    python benchmarks/bench_kernel.py [--rows 400 4000 40000] [--trees 200]

Each row of the output is the mean time to evaluate one candidate over a
state matrix, which is what the evolutionary loop does for every offspring.
"""

import argparse
import random
import sys
import time

import numpy as np

from assertevo import _pykernel, kernel
from assertevo.evolution import EvolutionConfig, Variation
from assertevo.subjects import get_subject, init_repo

try:
    from assertevo import _ckernel
except ImportError:
    _ckernel = None


def workload(n_rows, n_trees, seed=0):
    subject = get_subject("fast_floor")
    repo = init_repo(subject, max(1, n_rows // 3), random.Random(seed))
    pos, _ = repo.matrix("positive")
    neg, _ = repo.matrix("negative")
    data = np.vstack([pos, neg])
    reps = -(-n_rows // len(data))
    data = np.ascontiguousarray(np.tile(data, (reps, 1))[:n_rows])
    var_ = Variation(subject.signature, EvolutionConfig(), random.Random(seed))
    progs = [kernel.compile_expr(var_.ramped(2, 7), subject.signature) for _ in range(n_trees)]
    return progs, data


def time_impl(impl, progs, data, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for p in progs:
            kernel.run(p, data, impl=impl)
        best = min(best, time.perf_counter() - t0)
    return best / len(progs)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, nargs="+", default=[400, 4000, 40000])
    ap.add_argument("--trees", type=int, default=200)
    args = ap.parse_args(argv)
    if _ckernel is None:
        print("compiled kernel not built; only the numpy kernel is timed", file=sys.stderr)
    print(f"{'rows':>8} {'numpy us':>10} {'cython us':>10} {'speedup':>8}")
    for n in args.rows:
        progs, data = workload(n, args.trees)
        py = time_impl(_pykernel, progs, data)
        if _ckernel is not None:
            # both kernels must agree before their timings mean anything
            for p in progs:
                assert np.array_equal(kernel.run(p, data, impl=_pykernel),
                                      kernel.run(p, data, impl=_ckernel))
            cy = time_impl(_ckernel, progs, data)
            print(f"{n:>8} {py * 1e6:>10.1f} {cy * 1e6:>10.1f} {py / cy:>7.1f}x")
        else:
            print(f"{n:>8} {py * 1e6:>10.1f} {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
