"""``bench`` command line: generate workloads, replay them, sweep a dimension."""

from __future__ import annotations

import argparse
import contextlib
import sys

from . import __version__
from .bench import STORE_KINDS, VerificationError, compare_backends, run_bench, sweep, write_csv
from .lawn_store import BACKEND
from .workload import (
    ARRIVALS,
    WorkloadError,
    WorkloadSpec,
    generate_workload,
    load_workload,
    save_workload,
    validate_workload,
    write_workload,
)


def _add_spec_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=10_000, help="number of timers started")
    p.add_argument("--t", type=int, default=None, help="distinct ttl count")
    p.add_argument("--ttl-set", default="inc:1:1",
                   help="comma list (5,10,20), inc:START:STEP or pow2:START (default: %(default)s)")
    p.add_argument("--delete-ratio", type=float, default=0.0)
    p.add_argument("--arrival", choices=ARRIVALS, default="uniform")
    p.add_argument("--bursts", type=int, default=8, help="burst count for --arrival burst")
    p.add_argument("--horizon", type=int, default=10_000, help="arrival window in ticks")
    p.add_argument("--seed", type=int, default=0)


def _spec(args) -> WorkloadSpec:
    t = args.t
    if t is None and ":" in args.ttl_set:
        t = 10
    return WorkloadSpec(
        n_timers=args.n, distinct_ttls=t, ttl_values=args.ttl_set,
        delete_ratio=args.delete_ratio, arrival=args.arrival, horizon=args.horizon,
        seed=args.seed, bursts=args.bursts,
    )


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def cmd_gen(args) -> int:
    workload = generate_workload(_spec(args))
    if args.out in (None, "-"):
        write_workload(workload, sys.stdout)
    else:
        save_workload(workload, args.out)
        counts = validate_workload(workload)
        print(f"wrote {args.out}: {counts['starts']} starts, {counts['deletes']} deletes, "
              f"final tick {workload.final_tick}", file=sys.stderr)
    return 0


def cmd_run(args) -> int:
    workload = load_workload(args.workload)
    report = run_bench(args.store, workload, shards=args.shards, verify=args.verify,
                       wheel_slots=args.wheel_slots, threaded=args.threaded)
    with _output(args.csv) as fh:
        write_csv([report], fh)
    ticks = workload.final_tick
    print(
        f"{args.store} (lawn backend: {BACKEND}) n={report.n} t={report.t} K={report.k}: "
        f"events={report.events} deletes={report.deletes} "
        f"rebuild_touches={report.rebuild_touches} "
        f"peak_outstanding={report.peak_outstanding} "
        f"mean_tick_visits={report.mean_tick_visits:.3f} "
        f"mean_scan_overhead={report.mean_scan_overhead:.3f} "
        f"simulated={ticks * args.tick_ms / 1000.0:g}s"
        + (" verified" if report.verified else ""),
        file=sys.stderr,
    )
    if not report.reconciles():
        print("counter reconciliation failed: events + deletes + outstanding != starts",
              file=sys.stderr)
        return 1
    return 0


def cmd_sweep(args) -> int:
    try:
        values = [int(v) for v in args.values.split(",") if v]
    except ValueError:
        raise WorkloadError(f"bad --values {args.values!r}") from None
    reports = sweep(args.dim, values, _spec(args), store_kind=args.store, shards=args.shards,
                    wheel_slots=args.wheel_slots, timing=args.timing, verify=args.verify)
    with _output(args.csv) as fh:
        write_csv(reports, fh)
    for value, report in zip(values, reports):
        print(f"{args.dim}={value}: mean_scan_overhead={report.mean_scan_overhead:.3f} "
              f"rebuild_touches={report.rebuild_touches}", file=sys.stderr)
    return 0


def cmd_backends(args) -> int:
    workload = load_workload(args.workload) if args.workload else generate_workload(_spec(args))
    results = compare_backends(workload, repeat=args.repeat)
    base = results.get("python")
    for name, secs in results.items():
        speedup = f" ({base / secs:.1f}x vs python)" if base and name != "python" else ""
        print(f"{name:8s} {secs * 1000:10.1f} ms{speedup}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a workload file")
    _add_spec_args(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="replay a workload file on one store")
    p.add_argument("--store", choices=STORE_KINDS, default="lawn")
    p.add_argument("--shards", type=int, default=1, help="K, for sharded-lawn")
    p.add_argument("--workload", required=True)
    p.add_argument("--verify", action="store_true", help="compare against the oracle store")
    p.add_argument("--csv", default="-")
    p.add_argument("--wheel-slots", type=int, default=256)
    p.add_argument("--threaded", action="store_true", help="one worker thread per shard")
    p.add_argument("--tick-ms", type=float, default=1.0, help="tick resolution, for reporting only")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="one run per value of n, t or K")
    p.add_argument("--dim", choices=("n", "t", "K"), required=True)
    p.add_argument("--values", required=True, help="ascending comma list")
    p.add_argument("--csv", default="-")
    p.add_argument("--store", choices=STORE_KINDS, default="lawn")
    p.add_argument("--shards", type=int, default=1)
    p.add_argument("--wheel-slots", type=int, default=256)
    p.add_argument("--timing", action="store_true", help="also collect wall-time percentiles")
    p.add_argument("--verify", action="store_true")
    _add_spec_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("backends", help="time the compiled and pure-Python Lawn stores")
    p.add_argument("--workload", default=None)
    p.add_argument("--repeat", type=int, default=3)
    _add_spec_args(p)
    p.set_defaults(func=cmd_backends)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except VerificationError as exc:
        print(f"bench: verification failed: {exc}", file=sys.stderr)
        return 1
    except (WorkloadError, ValueError, OSError) as exc:
        print(f"bench: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
