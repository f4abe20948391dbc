"""Compare the numba and numpy kernel paths.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times the propagation kernels on chains of several lengths and prints the
median wall time of each path plus the speed-up.
"""

import argparse
import statistics
import time

import numpy as np

from chiralchain import kernels
from chiralchain.chain import ChiralRates, build_coupling_matrix, build_positions
from chiralchain.dynamics import step_propagator


def timed(fn, repeat):
    fn()  # warm-up, includes JIT compilation
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--steps", type=int, default=50_000)
    args = parser.parse_args(argv)

    print(f"{'kernel':<18}{'N':>4}{'steps':>8}{'numpy [ms]':>12}{'numba [ms]':>12}{'speed-up':>10}")
    for n in (4, 12, 20):
        geom = build_positions(n, np.pi, 0.1, seed=1)
        U = step_propagator(build_coupling_matrix(geom, ChiralRates(0.5, 1.0)), 0.01)
        a0 = np.zeros(n, complex)
        a0[:3 if n >= 3 else 1] = 1.0
        a0 /= np.linalg.norm(a0)
        amps = kernels.propagate_numpy(U, a0, args.steps)
        phases = np.asarray(geom.phases)
        cases = {
            "propagate": (
                lambda: kernels.propagate_numpy(U, a0, args.steps),
                lambda: kernels.propagate_numba(U, a0, args.steps),
            ),
            "total_population": (
                lambda: kernels.total_population_numpy(U, a0, args.steps),
                lambda: kernels.total_population_numba(U, a0, args.steps),
            ),
            "channel_rates": (
                lambda: kernels.channel_rates_numpy(amps, phases, 0.5, 1.0),
                lambda: kernels.channel_rates_numba(amps, phases, 0.5, 1.0),
            ),
        }
        for name, (slow, fast) in cases.items():
            t_np = timed(slow, args.repeat)
            t_nb = timed(fast, args.repeat)
            print(f"{name:<18}{n:>4}{args.steps:>8}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
