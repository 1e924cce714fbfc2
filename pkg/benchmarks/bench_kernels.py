"""Throughput comparison of the simulation backends.

Runs the same tour workload through every built backend and reports chain
steps per second, plus a bit-equality check between backends.  Usage::

    python3 benchmarks/bench_kernels.py [--tours N] [--repeat K]
"""

import argparse
import time

import numpy as np

from regenmc import available_backends, simulate_tours, zoo


def time_backend(zm, backend: str, tours: int, repeat: int) -> tuple[float, object]:
    best = float("inf")
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = simulate_tours(zm.model, zm.f, tours, rng=0, backend=backend)
        elapsed = time.perf_counter() - start
        best = min(best, elapsed)
    return best, result


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--tours", type=int, default=2_000_000,
                        help="tours per measurement (default 2e6)")
    parser.add_argument("--repeat", type=int, default=3,
                        help="measurements per backend; best is kept")
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends built: {', '.join(backends)}")
    for zm in zoo.standard_zoo():
        print(f"\n{zm.name}: {zm.description}")
        results = {}
        for backend in backends:
            # the python loop is ~10x slower; keep its workload proportionate
            tours = args.tours if backend != "python" else max(args.tours // 10, 1)
            elapsed, tour_batch = time_backend(zm, backend, tours, args.repeat)
            steps = tour_batch.total_steps
            results[backend] = tour_batch
            print(f"  {backend:>9}: {steps / elapsed / 1e6:8.2f}M steps/s "
                  f"({tours} tours, {steps} steps, best of {args.repeat})")
        if len(backends) == 2:
            a = simulate_tours(zm.model, zm.f, 10_000, rng=1, backend=backends[0])
            b = simulate_tours(zm.model, zm.f, 10_000, rng=1, backend=backends[1])
            agree = (
                np.array_equal(a.block_sums, b.block_sums)
                and np.array_equal(a.lengths, b.lengths)
                and np.array_equal(a.last_states, b.last_states)
            )
            print(f"  bit-equality on a common seed: {'yes' if agree else 'NO'}")


if __name__ == "__main__":
    main()
