"""Drive a timer store through a workload under the simulated clock."""

from __future__ import annotations

from collections import defaultdict
from typing import Callable, Dict, List, Optional, Tuple

from .baselines import OracleStore
from .core import ExpirationEvent, SimClock
from .workload import Op, Workload

TickMultisets = Dict[int, Tuple[Tuple[int, bytes], ...]]


def replay(
    store,
    workload: Workload,
    *,
    on_tick: Optional[Callable[[int, List[ExpirationEvent]], None]] = None,
    before_tick: Optional[Callable[[int], None]] = None,
    on_op: Optional[Callable[[Op], None]] = None,
) -> List[ExpirationEvent]:
    """Replay ``workload`` against ``store`` and return every emitted event.

    ``before_tick(now)`` runs just before each bookkeeping call,
    ``on_tick(now, events)`` right after it and ``on_op(op)`` after each
    applied operation; all of them see the store in a quiescent state.
    """
    clock = SimClock()
    ops = workload.ops
    n = len(ops)
    i = 0
    events: List[ExpirationEvent] = []
    start = store.start_timer
    delete = store.delete_timer
    tick = store.per_tick_bookkeeping
    now = 0
    while True:
        while i < n and ops[i].tick == now:
            op = ops[i]
            if op.kind == "S":
                start(op.id, op.ttl, op.payload, now)
            else:
                delete(op.id, op.ttl)
            if on_op is not None:
                on_op(op)
            i += 1
        if i < n and ops[i].tick < now:
            raise ValueError(f"workload op at tick {ops[i].tick} is behind the clock ({now})")
        if now >= workload.final_tick:
            break
        now = clock.advance(1)
        if before_tick is not None:
            before_tick(now)
        fired = tick(now)
        if fired:
            events.extend(fired)
        if on_tick is not None:
            on_tick(now, fired)
    return events


def tick_multisets(events: List[ExpirationEvent]) -> TickMultisets:
    """Group events by tick; within a tick the order is canonicalised away."""
    grouped = defaultdict(list)
    for ev in events:
        grouped[ev.fired_at].append((ev.id, ev.payload))
    return {tick: tuple(sorted(items)) for tick, items in grouped.items()}


def oracle_replay(workload: Workload) -> TickMultisets:
    return tick_multisets(replay(OracleStore(), workload))


def first_divergence(expected: TickMultisets, got: TickMultisets) -> Optional[int]:
    for tick in sorted(set(expected) | set(got)):
        if expected.get(tick, ()) != got.get(tick, ()):
            return tick
    return None
