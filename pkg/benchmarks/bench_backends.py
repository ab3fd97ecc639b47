"""Time the compiled and pure-numpy kernel lanes on the two standard shapes.

Run from the repository root:

    python3 benchmarks/bench_backends.py [--repeats N] [--iterations T]

Both lanes execute identical selection sequences, so the timings compare
implementations of the same arithmetic, not different runs.
"""

import argparse
import time

import numpy as np

import rkmimo as rk
from rkmimo.backend import available_backends, set_backend

SCHEMES = ("nRK", "RK", "GRK", "RSK")


def dense_case(seed, m=64, k=8):
    rng = rk.make_rng((8600, seed))
    cov = rk.build_covariance(rk.LargeScale(np.ones((k, m))), iota=0.5)
    chan = rk.sample_channel(cov, rng)
    x = rk.qam_modulate(rk.make_rng((8601, seed)).integers(0, 2, 4 * k))
    y = chan.h @ x + rk.sample_complex_gaussian(m, rng)
    return rk.assemble_sle(chan.h, y, 1.0), False


def sparse_case(seed, m=256, k=32, d=8):
    rng = rk.make_rng((8700, seed))
    mask = rk.build_visibility(m, d, rng, k)
    cov = rk.build_covariance(rk.LargeScale(np.ones((k, m))), visibility=mask)
    chan = rk.sample_channel(cov, rng)
    x = rk.qam_modulate(rk.make_rng((8701, seed)).integers(0, 2, 4 * k))
    y = chan.h @ x + rk.sample_complex_gaussian(m, rng)
    return rk.assemble_sle(chan.h, y, 1.0, chan.supports), True


def time_lane(lane, sle, use_sparse, scheme, iterations, repeats):
    prev = set_backend(lane)
    try:
        cfg = rk.SolverConfig(scheme, iterations, seed=1)
        rk.run_scheme(sle, cfg, use_sparse=use_sparse)  # warm-up / JIT
        best = np.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            rk.run_scheme(sle, cfg, use_sparse=use_sparse)
            best = min(best, time.perf_counter() - t0)
        return best
    finally:
        set_backend(prev)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="timed repeats, best-of")
    parser.add_argument("--iterations", type=int, default=1024, help="solver iterations")
    args = parser.parse_args()

    lanes = available_backends()
    if "numba" not in lanes:
        print("compiled lane unavailable; timing the numpy lane only")

    cases = [
        ("dense 64x8", *dense_case(0)),
        ("sparse 256x32 D=8", *sparse_case(0)),
    ]
    header = f"{'case':<20}{'scheme':<8}" + "".join(f"{lane + ' (ms)':>14}" for lane in lanes)
    if len(lanes) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, sle, use_sparse in cases:
        for scheme in SCHEMES:
            times = [
                time_lane(lane, sle, use_sparse, scheme, args.iterations, args.repeats)
                for lane in lanes
            ]
            row = f"{name:<20}{scheme:<8}" + "".join(f"{t * 1e3:>14.3f}" for t in times)
            if len(times) == 2:
                row += f"{times[1] / times[0]:>10.1f}x"
            print(row)


if __name__ == "__main__":
    main()
