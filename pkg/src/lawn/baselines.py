"""Comparison timer stores: single-level hashed wheel, binary heap, oracle.

All three satisfy :class:`lawn.core.TimerStore`. The oracle is deliberately
naive and is the ground truth for equivalence checks.
"""

from __future__ import annotations

from typing import Dict, List, Optional

from .core import (
    DuplicateId,
    ExpirationEvent,
    OpCounters,
    TimerRecord,
    UnknownId,
    check_ttl,
)

_START, _DELETE, _TICK = 0, 1, 2


class _Counted:
    def reset_counters(self) -> None:
        self._calls = [0, 0, 0]
        self._visits = [0, 0, 0]
        self._scans = [0, 0, 0]
        self._touches = [0, 0, 0]

    @property
    def counters(self) -> OpCounters:
        return OpCounters.from_rows(
            (self._calls[i], self._visits[i], self._scans[i], self._touches[i])
            for i in range(3)
        )


def _next_pow2(x: int) -> int:
    return 1 << max(0, (x - 1).bit_length())


class HashedWheel(_Counted):
    """Single-level hashed timing wheel with a bounded horizon.

    A record with endtime ``e`` lives in slot ``e % slots``. Starting a timer
    whose ttl does not fit in the horizon forces :meth:`rebuild`, which
    rehashes every outstanding record into a larger slot array.
    """

    def __init__(self, slots: int = 256):
        if slots < 1:
            raise ValueError("wheel needs at least one slot")
        self._slots: List[Dict[int, TimerRecord]] = [{} for _ in range(slots)]
        self._where: Dict[int, TimerRecord] = {}
        self._last = None  # last tick processed by bookkeeping
        self.rebuilds = 0
        self.reset_counters()

    @property
    def horizon(self) -> int:
        return len(self._slots)

    def outstanding_count(self) -> int:
        return len(self._where)

    __len__ = outstanding_count

    def bucket_count(self) -> int:
        return len(self._slots)

    def slot_of(self, id) -> int:
        return self._where[id].endtime % len(self._slots)

    def slot_ids(self, slot: int) -> list:
        return list(self._slots[slot])

    def rebuild(self, required_horizon: int, _op: int = _START) -> None:
        if required_horizon <= len(self._slots):
            raise ValueError("rebuild must grow the horizon")
        size = _next_pow2(2 * required_horizon)
        slots: List[Dict[int, TimerRecord]] = [{} for _ in range(size)]
        for old in self._slots:
            for id, rec in old.items():
                slots[rec.endtime % size][id] = rec
        self._slots = slots
        self._touches[_op] += len(self._where)
        self.rebuilds += 1

    def start_timer(self, id, ttl: int, payload: bytes, now: int) -> None:
        check_ttl(ttl)
        if id in self._where:
            raise DuplicateId(id)
        self._calls[_START] += 1
        if self._last is None:
            self._last = now
        if ttl >= len(self._slots):
            self.rebuild(ttl + 1)
        endtime = now + ttl
        rec = TimerRecord(id, ttl, endtime, payload)
        self._slots[endtime % len(self._slots)][id] = rec
        self._where[id] = rec
        self._visits[_START] += 1

    def delete_timer(self, id, ttl_hint: Optional[int] = None) -> TimerRecord:
        rec = self._where.pop(id, None)
        if rec is None:
            raise UnknownId(id)
        del self._slots[rec.endtime % len(self._slots)][id]
        self._calls[_DELETE] += 1
        self._visits[_DELETE] += 1
        return rec

    def per_tick_bookkeeping(self, now: int) -> List[ExpirationEvent]:
        self._calls[_TICK] += 1
        last = self._last
        self._last = now
        if last is None:
            ticks = range(now, now + 1)
        elif now <= last:
            return []
        else:
            ticks = range(last + 1, now + 1)
        size = len(self._slots)
        if len(ticks) >= size:
            ticks = range(now - size + 1, now + 1)
        events: List[ExpirationEvent] = []
        where = self._where
        for tick in ticks:
            slot = self._slots[tick % size]
            self._scans[_TICK] += 1
            if not slot:
                continue
            self._visits[_TICK] += len(slot)
            due = [rec for rec in slot.values() if rec.endtime <= now]
            for rec in due:
                del slot[rec.id]
                del where[rec.id]
                events.append(ExpirationEvent(now, rec.id, rec.payload))
        return events


class HeapStore(_Counted):
    """Binary min-heap on (endtime, insertion seq) with an id -> index map
    so that delete is an exact O(log n) sift-removal."""

    def __init__(self):
        self._heap: list = []  # entries: [endtime, seq, record]
        self._pos: Dict[int, int] = {}
        self._seq = 0
        self.reset_counters()

    def outstanding_count(self) -> int:
        return len(self._heap)

    __len__ = outstanding_count

    # sifts move a hole instead of swapping; one counted visit per comparison
    def _up(self, i: int, op: int) -> None:
        h, pos = self._heap, self._pos
        entry = h[i]
        key = (entry[0], entry[1])
        visits = 0
        while i > 0:
            parent = (i - 1) >> 1
            up = h[parent]
            visits += 1
            if not key < (up[0], up[1]):
                break
            h[i] = up
            pos[up[2].id] = i
            i = parent
        h[i] = entry
        pos[entry[2].id] = i
        self._visits[op] += visits

    def _down(self, i: int, op: int) -> None:
        h, pos = self._heap, self._pos
        n = len(h)
        entry = h[i]
        key = (entry[0], entry[1])
        visits = 0
        while True:
            child = 2 * i + 1
            if child >= n:
                break
            c = h[child]
            if child + 1 < n:
                r = h[child + 1]
                visits += 1
                if (r[0], r[1]) < (c[0], c[1]):
                    child += 1
                    c = r
            visits += 1
            if not (c[0], c[1]) < key:
                break
            h[i] = c
            pos[c[2].id] = i
            i = child
        h[i] = entry
        pos[entry[2].id] = i
        self._visits[op] += visits

    def _remove_at(self, i: int, op: int) -> TimerRecord:
        h = self._heap
        entry = h[i]
        tail = h.pop()
        del self._pos[entry[2].id]
        if i < len(h):
            h[i] = tail
            self._pos[tail[2].id] = i
            self._up(i, op)
            self._down(i, op)
        return entry[2]

    def start_timer(self, id, ttl: int, payload: bytes, now: int) -> None:
        check_ttl(ttl)
        if id in self._pos:
            raise DuplicateId(id)
        self._calls[_START] += 1
        rec = TimerRecord(id, ttl, now + ttl, payload)
        self._heap.append([rec.endtime, self._seq, rec])
        self._seq += 1
        self._pos[id] = len(self._heap) - 1
        self._up(len(self._heap) - 1, _START)

    def delete_timer(self, id, ttl_hint: Optional[int] = None) -> TimerRecord:
        i = self._pos.get(id)
        if i is None:
            raise UnknownId(id)
        self._calls[_DELETE] += 1
        return self._remove_at(i, _DELETE)

    def per_tick_bookkeeping(self, now: int) -> List[ExpirationEvent]:
        self._calls[_TICK] += 1
        events: List[ExpirationEvent] = []
        h = self._heap
        while h:
            self._visits[_TICK] += 1
            if h[0][0] > now:
                break
            rec = self._remove_at(0, _TICK)
            events.append(ExpirationEvent(now, rec.id, rec.payload))
        return events


class OracleStore(_Counted):
    """Flat collection scanned in full on every tick. Obviously correct, slow."""

    def __init__(self):
        # insertion-ordered, so iteration order is the insertion sequence
        self._records: Dict[int, TimerRecord] = {}
        self.reset_counters()

    def outstanding_count(self) -> int:
        return len(self._records)

    __len__ = outstanding_count

    def start_timer(self, id, ttl: int, payload: bytes, now: int) -> None:
        check_ttl(ttl)
        if id in self._records:
            raise DuplicateId(id)
        self._records[id] = TimerRecord(id, ttl, now + ttl, payload)
        self._calls[_START] += 1
        self._visits[_START] += 1

    def delete_timer(self, id, ttl_hint: Optional[int] = None) -> TimerRecord:
        try:
            rec = self._records.pop(id)
        except KeyError:
            raise UnknownId(id) from None
        self._calls[_DELETE] += 1
        self._visits[_DELETE] += 1
        return rec

    def per_tick_bookkeeping(self, now: int) -> List[ExpirationEvent]:
        self._calls[_TICK] += 1
        records = self._records
        self._visits[_TICK] += len(records)
        due = [rec for rec in records.values() if rec.endtime <= now]
        if not due:
            return []
        # stable sort keeps insertion order among equal endtimes
        due.sort(key=lambda rec: rec.endtime)
        for rec in due:
            del records[rec.id]
        return [ExpirationEvent(now, rec.id, rec.payload) for rec in due]
