"""Counter-first benchmark harness.

Operation counters (node visits, bucket scans, rebuild touches) are the
primary evidence; wall times are collected alongside but are machine
dependent. A bookkeeping call counts as a *scan* when it visits at least one
node; the ``tick_scan`` CSV row reports scan visits minus the nodes popped as
expired, i.e. the per-tick overhead that is independent of how many timers
fire.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .baselines import HashedWheel, HeapStore, OracleStore
from .lawn_store import BACKENDS, LawnStore
from .replay import first_divergence, oracle_replay, replay, tick_multisets
from .sharding import ShardedLawn
from .workload import Workload, WorkloadSpec, generate_workload

STORE_KINDS = ("lawn", "wheel", "heap", "oracle", "sharded-lawn")
CSV_HEADER = [
    "store", "seed", "n", "t", "K", "op", "count", "node_visits",
    "bucket_scans", "rebuild_touches", "wall_ns_p50", "wall_ns_p99",
]

_oracle_cache: Dict[str, dict] = {}


class VerificationError(AssertionError):
    def __init__(self, tick: int, expected, got):
        self.tick = tick
        self.expected = expected
        self.got = got
        super().__init__(
            f"event multiset diverges from oracle at tick {tick}: "
            f"expected {len(expected)} events, got {len(got)}"
        )


def make_store(kind: str, *, shards: int = 1, wheel_slots: int = 256,
               backend: Optional[str] = None, threaded: bool = False):
    if kind == "lawn":
        return (BACKENDS[backend] if backend else LawnStore)()
    if kind == "wheel":
        return HashedWheel(wheel_slots)
    if kind == "heap":
        return HeapStore()
    if kind == "oracle":
        return OracleStore()
    if kind == "sharded-lawn":
        factory = BACKENDS[backend] if backend else None
        return ShardedLawn(shards, threaded=threaded, store_factory=factory)
    raise ValueError(f"unknown store kind {kind!r}; choose from {', '.join(STORE_KINDS)}")


@dataclass
class OpRow:
    count: int = 0
    node_visits: int = 0
    bucket_scans: int = 0
    rebuild_touches: int = 0
    wall_ns: List[int] = field(default_factory=list)

    def percentile(self, q: float) -> int:
        if not self.wall_ns:
            return 0
        return int(np.percentile(np.asarray(self.wall_ns, dtype=np.int64), q))


@dataclass
class BenchReport:
    store: str
    seed: str
    n: int
    t: int
    k: int
    ops: Dict[str, OpRow]
    starts: int = 0
    deletes: int = 0
    events: int = 0
    final_outstanding: int = 0
    peak_outstanding: int = 0
    peak_buckets: Optional[int] = None
    verified: Optional[bool] = None
    multisets: Optional[dict] = None

    @property
    def rebuild_touches(self) -> int:
        return sum(row.rebuild_touches for name, row in self.ops.items() if name != "tick_scan")

    @property
    def mean_scan_overhead(self) -> float:
        """Mean node visits per scanning tick, excluding expired-node pops."""
        scan = self.ops["tick_scan"]
        return scan.node_visits / scan.count if scan.count else 0.0

    @property
    def mean_tick_visits(self) -> float:
        tick = self.ops["tick"]
        return tick.node_visits / tick.count if tick.count else 0.0

    def reconciles(self) -> bool:
        return self.events + self.deletes + self.final_outstanding == self.starts

    def csv_rows(self) -> List[list]:
        rows = []
        for name in ("start", "delete", "tick", "tick_scan"):
            row = self.ops[name]
            rows.append([
                self.store, self.seed, self.n, self.t, self.k, name, row.count,
                row.node_visits, row.bucket_scans, row.rebuild_touches,
                row.percentile(50), row.percentile(99),
            ])
        return rows


def write_csv(reports: Iterable[BenchReport], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for report in reports:
        writer.writerows(report.csv_rows())


def _counter_row(counters, op: str):
    s = counters[op]
    return s.calls, s.node_visits, s.bucket_scans, s.rebuild_touches


def run_bench(
    store_kind: str,
    workload: Workload,
    *,
    shards: int = 1,
    verify: bool = False,
    wheel_slots: int = 256,
    timing: bool = True,
    backend: Optional[str] = None,
    threaded: bool = False,
    keep_multisets: bool = False,
    store=None,
) -> BenchReport:
    """Replay ``workload`` on a fresh store and collect a :class:`BenchReport`.

    With ``verify`` the per-tick event multisets are compared to an oracle
    run (cached per workload digest) and the first divergent tick raises
    :class:`VerificationError`.
    """
    if store is None:
        store = make_store(store_kind, shards=shards, wheel_slots=wheel_slots,
                           backend=backend, threaded=threaded)
    rows = {name: OpRow() for name in ("start", "delete", "tick", "tick_scan")}
    peak = {"outstanding": 0, "buckets": None}
    has_buckets = hasattr(store, "bucket_count")
    clock = time.perf_counter_ns
    wall = {"start": rows["start"].wall_ns, "delete": rows["delete"].wall_ns,
            "tick": rows["tick"].wall_ns}

    # timing wrappers sit between the replay loop and the store
    class _Timed:
        def start_timer(self, id, ttl, payload, now):
            t0 = clock()
            store.start_timer(id, ttl, payload, now)
            wall["start"].append(clock() - t0)

        def delete_timer(self, id, ttl_hint=None):
            t0 = clock()
            rec = store.delete_timer(id, ttl_hint)
            wall["delete"].append(clock() - t0)
            return rec

        def per_tick_bookkeeping(self, now):
            t0 = clock()
            events = store.per_tick_bookkeeping(now)
            wall["tick"].append(clock() - t0)
            return events

    driver = _Timed() if timing else store
    scan = rows["tick_scan"]
    prev = {"tick": _counter_row(store.counters, "tick")}

    def on_tick(now, fired):
        cur = _counter_row(store.counters, "tick")
        old = prev["tick"]
        visits = cur[1] - old[1]
        if visits:
            scan.count += 1
            scan.node_visits += visits - len(fired)
            scan.bucket_scans += cur[2] - old[2]
            if timing:
                scan.wall_ns.append(wall["tick"][-1])
        prev["tick"] = cur

    def before_tick(now):
        # sampled at tick boundaries, after the previous tick's ops landed
        outstanding = store.outstanding_count()
        if outstanding > peak["outstanding"]:
            peak["outstanding"] = outstanding
        if has_buckets:
            buckets = store.bucket_count()
            if peak["buckets"] is None or buckets > peak["buckets"]:
                peak["buckets"] = buckets

    try:
        events = replay(driver, workload, on_tick=on_tick, before_tick=before_tick)
        counters = store.counters
        final_outstanding = store.outstanding_count()
    finally:
        if isinstance(store, ShardedLawn) and threaded:
            store.close()

    for name in ("start", "delete", "tick"):
        calls, visits, scans, touches = _counter_row(counters, name)
        row = rows[name]
        row.count, row.node_visits, row.bucket_scans, row.rebuild_touches = calls, visits, scans, touches

    meta = workload.meta
    report = BenchReport(
        store=store_kind,
        seed=meta.get("seed", ""),
        n=workload.starts,
        t=workload.distinct_ttls,
        k=shards if store_kind == "sharded-lawn" else 1,
        ops=rows,
        starts=rows["start"].count,
        deletes=rows["delete"].count,
        events=len(events),
        final_outstanding=final_outstanding,
        peak_outstanding=peak["outstanding"],
        peak_buckets=peak["buckets"],
    )
    if verify or keep_multisets:
        got = tick_multisets(events)
        if keep_multisets:
            report.multisets = got
        if verify:
            expected = cached_oracle(workload)
            tick = first_divergence(expected, got)
            if tick is not None:
                raise VerificationError(tick, expected.get(tick, ()), got.get(tick, ()))
            report.verified = True
    return report


def cached_oracle(workload: Workload) -> dict:
    key = workload.digest()
    result = _oracle_cache.get(key)
    if result is None:
        result = _oracle_cache[key] = oracle_replay(workload)
    return result


def sweep(
    dim: str,
    values: Sequence[int],
    base: WorkloadSpec,
    *,
    store_kind: str = "lawn",
    shards: int = 1,
    wheel_slots: int = 256,
    timing: bool = False,
    verify: bool = False,
    keep_multisets: bool = False,
) -> List[BenchReport]:
    """One :func:`run_bench` per value of ``dim`` (``n``, ``t`` or ``K``)."""
    if dim not in ("n", "t", "K"):
        raise ValueError(f"sweep dimension must be n, t or K, got {dim!r}")
    values = list(values)
    if values != sorted(values):
        raise ValueError("sweep values must be ascending")
    reports = []
    workload = None
    for value in values:
        if dim == "K":
            if workload is None:
                workload = generate_workload(base)
            kind, k = "sharded-lawn", value
        else:
            spec = replace(base, **({"n_timers": value} if dim == "n" else {"distinct_ttls": value}))
            workload = generate_workload(spec)
            kind, k = store_kind, shards
        reports.append(run_bench(kind, workload, shards=k, wheel_slots=wheel_slots,
                                 timing=timing, verify=verify, keep_multisets=keep_multisets))
    return reports


def least_squares_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    slope, _ = np.polyfit(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), 1)
    return float(slope)


def compare_backends(workload: Workload, repeat: int = 3) -> Dict[str, float]:
    """Best-of-``repeat`` replay time in seconds for each available Lawn backend."""
    results = {}
    for name, cls in BACKENDS.items():
        best = float("inf")
        for _ in range(repeat):
            store = cls()
            t0 = time.perf_counter()
            replay(store, workload)
            best = min(best, time.perf_counter() - t0)
        results[name] = best
    return results
