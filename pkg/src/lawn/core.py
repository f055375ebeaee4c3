"""Shared vocabulary for every timer store in the package.

Time is a plain integer tick count. A store never reads a clock by itself:
the caller passes ``now`` into ``start_timer`` and ``per_tick_bookkeeping``.
Timer ids are non-negative ints, payloads are ``bytes`` that are handed back
untouched in the expiration event.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, List, NamedTuple, Optional, Protocol, runtime_checkable

MAX_TICK = 2**63 - 1

OPS = ("start", "delete", "tick")


class TimerError(Exception):
    """Base class for store contract violations."""


class DuplicateId(TimerError, KeyError):
    """The id is already outstanding in the store."""


class UnknownId(TimerError, KeyError):
    """The id is not outstanding in the store."""


class InvalidTtl(TimerError, ValueError):
    """TTL must be a positive integer number of ticks."""


class TimerRecord(NamedTuple):
    id: int
    ttl: int
    endtime: int
    payload: bytes

    @property
    def start_time(self) -> int:
        return self.endtime - self.ttl


class ExpirationEvent(NamedTuple):
    fired_at: int
    id: int
    payload: bytes


@dataclass
class OpStats:
    calls: int = 0
    node_visits: int = 0
    bucket_scans: int = 0
    rebuild_touches: int = 0

    def __sub__(self, other: "OpStats") -> "OpStats":
        return OpStats(
            self.calls - other.calls,
            self.node_visits - other.node_visits,
            self.bucket_scans - other.bucket_scans,
            self.rebuild_touches - other.rebuild_touches,
        )

    def __add__(self, other: "OpStats") -> "OpStats":
        return OpStats(
            self.calls + other.calls,
            self.node_visits + other.node_visits,
            self.bucket_scans + other.bucket_scans,
            self.rebuild_touches + other.rebuild_touches,
        )


@dataclass
class OpCounters:
    """Snapshot of a store's instrumentation, broken down by operation.

    Stores keep raw integers internally and hand out a fresh snapshot each
    time ``store.counters`` is read, so snapshots can be subtracted to get the
    cost of a single call.
    """

    by_op: dict = field(default_factory=lambda: {op: OpStats() for op in OPS})

    @property
    def node_visits(self) -> int:
        return sum(s.node_visits for s in self.by_op.values())

    @property
    def bucket_scans(self) -> int:
        return sum(s.bucket_scans for s in self.by_op.values())

    @property
    def rebuild_touches(self) -> int:
        return sum(s.rebuild_touches for s in self.by_op.values())

    def __getitem__(self, op: str) -> OpStats:
        return self.by_op[op]

    def __sub__(self, other: "OpCounters") -> "OpCounters":
        return OpCounters({op: self.by_op[op] - other.by_op[op] for op in self.by_op})

    def __add__(self, other: "OpCounters") -> "OpCounters":
        return OpCounters({op: self.by_op[op] + other.by_op[op] for op in self.by_op})

    @classmethod
    def from_rows(cls, rows) -> "OpCounters":
        # rows: iterable of (calls, node_visits, bucket_scans, rebuild_touches) in OPS order
        return cls({op: OpStats(*row) for op, row in zip(OPS, rows)})

    @classmethod
    def total(cls, counters: Iterable["OpCounters"]) -> "OpCounters":
        acc = cls()
        for c in counters:
            acc = acc + c
        return acc


@runtime_checkable
class TimerStore(Protocol):
    """Behavioural contract shared by the Lawn, wheel, heap and oracle stores.

    A started timer yields exactly one :class:`ExpirationEvent` unless it is
    deleted first. Deletion is silent and returns the removed record.
    """

    def start_timer(self, id: int, ttl: int, payload: bytes, now: int) -> None: ...

    def delete_timer(self, id: int, ttl_hint: Optional[int] = None) -> TimerRecord: ...

    def per_tick_bookkeeping(self, now: int) -> List[ExpirationEvent]: ...

    def outstanding_count(self) -> int: ...

    @property
    def counters(self) -> OpCounters: ...

    def reset_counters(self) -> None: ...


def check_ttl(ttl) -> int:
    if isinstance(ttl, bool) or not isinstance(ttl, int) or ttl < 1:
        raise InvalidTtl(f"ttl must be a positive integer tick count, got {ttl!r}")
    return ttl


class SimClock:
    """Deterministic tick counter driving bookkeeping in tests and benchmarks."""

    def __init__(self, start: int = 0):
        if start < 0:
            raise ValueError("clock cannot start before tick 0")
        self._now = start

    @property
    def now(self) -> int:
        return self._now

    def advance(self, by: int = 1) -> int:
        if by < 1:
            raise ValueError(f"clock can only move forward, got step {by}")
        now = self._now + by
        if now > MAX_TICK:
            raise OverflowError("tick counter exceeded 2**63 - 1")
        self._now = now
        return now

    def __repr__(self) -> str:
        return f"SimClock(now={self._now})"


class RealClock:
    """Maps wall-clock time onto ticks of ``tick_ms`` milliseconds.

    Thin adapter for callers running a store against real time; nothing in
    the test-suite depends on it.
    """

    def __init__(self, tick_ms: float = 1.0, _monotonic=time.monotonic):
        if tick_ms <= 0:
            raise ValueError("tick_ms must be positive")
        self.tick_ms = tick_ms
        self._monotonic = _monotonic
        self._origin = _monotonic()

    @property
    def now(self) -> int:
        return int((self._monotonic() - self._origin) * 1000.0 / self.tick_ms)


def clock_advance(clock: SimClock, by: int = 1) -> int:
    return clock.advance(by)


def drive_until(store: TimerStore, clock: SimClock, until: int) -> List[ExpirationEvent]:
    """Step ``clock`` one tick at a time up to ``until``, running bookkeeping
    after every step, and return all emitted events in emission order."""
    if until < clock.now:
        raise ValueError(f"cannot drive backwards from {clock.now} to {until}")
    events: List[ExpirationEvent] = []
    tick = store.per_tick_bookkeeping
    while clock.now < until:
        events.extend(tick(clock.advance(1)))
    return events
