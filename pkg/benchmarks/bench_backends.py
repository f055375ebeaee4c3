"""Compare the compiled Lawn store with the pure-Python fallback.

Reports best-of-N wall time for a full workload replay and for the three
kernels on their own (bulk starts, bulk deletes, an expiry-heavy tick loop).

    python3 benchmarks/bench_backends.py --n 200000 --t 100 --repeat 5
"""

import argparse
import time

from lawn.bench import compare_backends
from lawn.lawn_store import BACKENDS
from lawn.workload import WorkloadSpec, generate_workload


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        elapsed = fn()
        best = min(best, elapsed)
    return best


def kernel_times(cls, n, t, repeat):
    ttls = [1 + i % t for i in range(n)]
    payload = b"x"

    def starts():
        store = cls()
        t0 = time.perf_counter()
        for i in range(n):
            store.start_timer(i, ttls[i], payload, 0)
        return time.perf_counter() - t0

    def deletes():
        store = cls()
        for i in range(n):
            store.start_timer(i, ttls[i], payload, 0)
        t0 = time.perf_counter()
        for i in range(n):
            store.delete_timer(i)
        return time.perf_counter() - t0

    def ticks():
        store = cls()
        for i in range(n):
            store.start_timer(i, ttls[i], payload, 0)
        t0 = time.perf_counter()
        for now in range(1, t + 1):
            store.per_tick_bookkeeping(now)
        return time.perf_counter() - t0

    return {
        "start": _best(starts, repeat),
        "delete": _best(deletes, repeat),
        "tick": _best(ticks, repeat),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=100_000)
    parser.add_argument("--t", type=int, default=50)
    parser.add_argument("--delete-ratio", type=float, default=0.3)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    if len(BACKENDS) < 2:
        print("compiled backend not built; only the pure-Python store is available")
    workload = generate_workload(WorkloadSpec(args.n, args.t, "inc:1:3", delete_ratio=args.delete_ratio,
                                              horizon=max(1, args.n // 10), seed=0))
    replay_times = compare_backends(workload, repeat=args.repeat)
    kernels = {name: kernel_times(cls, args.n, args.t, args.repeat) for name, cls in BACKENDS.items()}

    print(f"{'backend':8s} {'replay ms':>10s} {'start ns':>9s} {'delete ns':>9s} {'tick ms':>8s}")
    for name in BACKENDS:
        k = kernels[name]
        print(f"{name:8s} {replay_times[name] * 1e3:10.1f} {k['start'] / args.n * 1e9:9.0f} "
              f"{k['delete'] / args.n * 1e9:9.0f} {k['tick'] * 1e3:8.1f}")
    if "python" in replay_times and "cython" in replay_times:
        print(f"replay speedup: {replay_times['python'] / replay_times['cython']:.2f}x")


if __name__ == "__main__":
    main()
