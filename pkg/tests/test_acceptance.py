"""Acceptance checks, each reported as one PASS/FAIL line in the summary.

Run alone with ``pytest -m acceptance``. All comparisons are exact apart
from the two cost-shape bounds, which use the stated tolerances.
"""

import random
from collections import Counter

import pytest

from conftest import closed_form_fires, record_acceptance
from lawn.baselines import HashedWheel, HeapStore
from lawn.bench import least_squares_slope, run_bench, sweep
from lawn.lawn_store import BACKENDS
from lawn.replay import first_divergence, oracle_replay, replay, tick_multisets
from lawn.sharding import ShardedLawn
from lawn.workload import Op, Workload, WorkloadSpec, generate_workload

pytestmark = pytest.mark.acceptance

SEEDS = range(100)
TTL_COUNTS = (1, 10, 100)
DELETE_RATIOS = (0.0, 0.3)


def _equivalence_spec(seed):
    # seeds cycle through every (t, delete_ratio) pair; the ttl stride pushes
    # the largest ttls past the default wheel span so rebuilds happen too
    t = TTL_COUNTS[seed % 3]
    ratio = DELETE_RATIOS[(seed // 3) % 2]
    return WorkloadSpec(10_000, t, "inc:1:7", delete_ratio=ratio, horizon=10_000, seed=seed)


def _stores():
    stores = {f"lawn-{name}": cls for name, cls in sorted(BACKENDS.items())}
    stores["wheel"] = HashedWheel
    stores["heap"] = HeapStore
    stores["sharded-1"] = lambda: ShardedLawn(1)
    stores["sharded-4"] = lambda: ShardedLawn(4)
    return stores


def _checked_replay(store, workload):
    """Replay while tracking the expected population independently.

    Returns (multisets, max lateness, invariant violations, min lateness).
    """
    ttl_of = {}
    start_of = {}
    live_ttls = Counter()
    tally = {"starts": 0, "deletes": 0, "fires": 0}
    violations = []
    has_buckets = hasattr(store, "bucket_count") and not isinstance(store, HashedWheel)

    def check(now):
        expected = tally["starts"] - tally["fires"] - tally["deletes"]
        got = store.outstanding_count()
        if got != expected:
            violations.append((now, "outstanding", expected, got))
        if has_buckets and store.bucket_count() != len(live_ttls):
            violations.append((now, "buckets", len(live_ttls), store.bucket_count()))

    def on_op(op):
        if op.kind == "S":
            tally["starts"] += 1
            ttl_of[op.id] = op.ttl
            start_of[op.id] = op.tick
            live_ttls[op.ttl] += 1
        else:
            tally["deletes"] += 1
            live_ttls[op.ttl] -= 1
            if not live_ttls[op.ttl]:
                del live_ttls[op.ttl]

    lateness = []

    def on_tick(now, fired):
        for ev in fired:
            ttl = ttl_of[ev.id]
            lateness.append(ev.fired_at - (start_of[ev.id] + ttl))
            live_ttls[ttl] -= 1
            if not live_ttls[ttl]:
                del live_ttls[ttl]
        tally["fires"] += len(fired)
        check(now)

    events = replay(store, workload, on_tick=on_tick, before_tick=check, on_op=on_op)
    late_max = max(lateness, default=0)
    late_min = min(lateness, default=0)
    return tick_multisets(events), late_max, late_min, violations


@pytest.fixture(scope="module")
def equivalence_runs():
    results = []
    for seed in SEEDS:
        workload = generate_workload(_equivalence_spec(seed))
        expected = oracle_replay(workload)
        assert expected == closed_form_fires(workload), f"oracle disagrees with closed form, seed {seed}"
        for name, factory in _stores().items():
            store = factory()
            got, late_max, late_min, violations = _checked_replay(store, workload)
            results.append({
                "seed": seed,
                "store": name,
                "divergence": first_divergence(expected, got),
                "late_max": late_max,
                "late_min": late_min,
                "violations": violations,
                "rebuild_touches": store.counters.rebuild_touches,
            })
    return results


def test_oracle_equivalence(equivalence_runs):
    bad = [(r["seed"], r["store"], r["divergence"]) for r in equivalence_runs if r["divergence"] is not None]
    stores = sorted({r["store"] for r in equivalence_runs})
    record_acceptance("oracle-equivalence", not bad,
                      f"{len(equivalence_runs)} runs over {len(SEEDS)} seeds, stores={','.join(stores)}, "
                      f"mismatches={len(bad)}")
    assert not bad, bad[:5]


def test_timeliness(equivalence_runs):
    worst = max(r["late_max"] for r in equivalence_runs)
    best = min(r["late_min"] for r in equivalence_runs)
    ok = worst == 0 and best == 0
    record_acceptance("timeliness", ok, f"fired_at - endtime in [{best}, {worst}] over all events")
    assert ok


def test_density_invariants(equivalence_runs):
    bad = [(r["seed"], r["store"], r["violations"][0]) for r in equivalence_runs if r["violations"]]
    record_acceptance("density", not bad,
                      f"outstanding and bucket-count checks at every tick; violating runs={len(bad)}")
    assert not bad, bad[:5]


def test_fifo_within_bucket():
    rng = random.Random(2024)
    failures = []
    factories = [cls for _, cls in sorted(BACKENDS.items())] + [lambda: ShardedLawn(4)]
    for seed in range(1000):
        ttl = rng.randint(1, 60)
        spec = WorkloadSpec(rng.randint(1, 300), 1, [ttl], delete_ratio=rng.choice((0.0, 0.2, 0.5)),
                            arrival=rng.choice(("uniform", "burst")), horizon=rng.randint(1, 400),
                            bursts=rng.randint(1, 6), seed=seed)
        workload = generate_workload(spec)
        deleted = {op.id for op in workload.ops if op.kind == "D"}
        started = [op.id for op in workload.ops if op.kind == "S" and op.id not in deleted]
        for factory in factories:
            fired = [ev.id for ev in replay(factory(), workload)]
            if fired != started:
                failures.append(seed)
    record_acceptance("fifo-within-bucket", not failures,
                      f"1000 single-ttl workloads x {len(factories)} stores, failures={len(failures)}")
    assert not failures, failures[:5]


def _overflow_workload():
    base = generate_workload(WorkloadSpec(100_000, 8, "inc:10:10", arrival="burst", bursts=1, horizon=1, seed=8))
    assert {op.tick for op in base.ops} == {0}
    ops = base.ops + [Op("S", 0, 100_000, 4 * 256, b"late")]
    return Workload(ops, 4 * 256)


def test_overflow_asymmetry(equivalence_runs):
    workload = _overflow_workload()
    wheel = run_bench("wheel", workload, wheel_slots=256, timing=False)
    lawns = [run_bench("lawn", workload, backend=name, timing=False) for name in sorted(BACKENDS)]
    lawn_elsewhere = max(r["rebuild_touches"] for r in equivalence_runs
                         if r["store"].startswith(("lawn", "sharded")))
    ok = (wheel.rebuild_touches >= 100_000 and all(r.rebuild_touches == 0 for r in lawns)
          and lawn_elsewhere == 0)
    record_acceptance("overflow-asymmetry", ok,
                      f"wheel rebuild_touches={wheel.rebuild_touches}, "
                      f"lawn rebuild_touches={[r.rebuild_touches for r in lawns]}, "
                      f"lawn max over equivalence runs={lawn_elsewhere}")
    assert ok


def test_per_tick_cost_shape():
    base = WorkloadSpec(100_000, 10, "inc:1000:1", horizon=10_000, seed=0)
    t_values = [1, 10, 100, 1000]
    by_t = [r.mean_scan_overhead for r in sweep("t", t_values, base)]
    slope = least_squares_slope(t_values, by_t)
    by_n = [r.mean_scan_overhead for r in sweep("n", [1_000, 10_000, 100_000], base)]
    spread = max(by_n) / min(by_n)
    ok = 0.8 <= slope <= 1.2 and spread < 2.0
    record_acceptance("per-tick-cost-shape", ok,
                      f"slope vs t={slope:.3f} (means {[round(v, 2) for v in by_t]}), "
                      f"n-sweep max/min={spread:.3f} (means {[round(v, 2) for v in by_n]})")
    assert 0.8 <= slope <= 1.2
    assert spread < 2.0


def test_fast_path():
    workload = Workload([Op("S", 0, 1, 10_000, b"p")], 10_000)
    results = {}
    for name, cls in sorted(BACKENDS.items()):
        store = cls()
        zero = []

        def on_tick(now, fired, store=store, last=[0]):
            visits = store.counters["tick"].node_visits
            zero.append(visits == last[0])
            last[0] = visits

        events = replay(store, workload, on_tick=on_tick)
        assert [(e.fired_at, e.id) for e in events] == [(10_000, 1)]
        results[name] = (sum(zero), len(zero))
    ok = all(z >= 9_998 and n == 10_000 for z, n in results.values())
    record_acceptance("fast-path", ok,
                      ", ".join(f"{k}: {z}/{n} zero-visit ticks" for k, (z, n) in results.items()))
    assert ok


def test_shard_invariance():
    mismatched = []
    for seed in range(20):
        workload = generate_workload(WorkloadSpec(5_000, 40, "inc:1:5", delete_ratio=0.3, horizon=3_000, seed=seed))
        reference = None
        for k in (1, 2, 8):
            # the largest shard count runs with worker threads on odd seeds
            threaded = k == 8 and seed % 2 == 1
            report = run_bench("sharded-lawn", workload, shards=k, threaded=threaded,
                               timing=False, keep_multisets=True)
            if reference is None:
                reference = report.multisets
            elif report.multisets != reference:
                mismatched.append((seed, k))
    record_acceptance("shard-invariance", not mismatched,
                      f"20 seeds x K in (1, 2, 8), mismatches={len(mismatched)}")
    assert not mismatched, mismatched
