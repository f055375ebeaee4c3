"""Pure-Python Lawn store.

Used when the compiled ``lawn._lawn_ext`` module is unavailable, or when
``LAWN_PURE_PYTHON=1`` is set. Behaviour and counters match the compiled
version exactly; the test-suite runs against both.
"""

from __future__ import annotations

from bisect import bisect_left
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


class _Node:
    __slots__ = ("id", "ttl", "endtime", "payload", "prev", "next", "bucket")

    def __init__(self, id, ttl, endtime, payload, bucket):
        self.id = id
        self.ttl = ttl
        self.endtime = endtime
        self.payload = payload
        self.prev = None
        self.next = None
        self.bucket = bucket

    def record(self) -> TimerRecord:
        return TimerRecord(self.id, self.ttl, self.endtime, self.payload)


class _Bucket:
    """FIFO of same-ttl nodes; members unlink themselves in O(1)."""

    __slots__ = ("ttl", "head", "tail", "size")

    def __init__(self, ttl: int):
        self.ttl = ttl
        self.head: Optional[_Node] = None
        self.tail: Optional[_Node] = None
        self.size = 0

    def append(self, node: _Node) -> None:
        tail = self.tail
        node.prev = tail
        if tail is None:
            self.head = node
        else:
            tail.next = node
        self.tail = node
        self.size += 1

    def unlink(self, node: _Node) -> None:
        prev, nxt = node.prev, node.next
        if prev is None:
            self.head = nxt
        else:
            prev.next = nxt
        if nxt is None:
            self.tail = prev
        else:
            nxt.prev = prev
        node.prev = node.next = None
        self.size -= 1

    def ids(self) -> list:
        out = []
        node = self.head
        while node is not None:
            out.append(node.id)
            node = node.next
        return out


class LawnStore:
    """TTL-bucketed timer store.

    Timers sharing a ttl live in one FIFO bucket, so each bucket is already
    sorted by expiration and bookkeeping only inspects bucket heads. A cached
    lower bound on the next expiration lets bookkeeping skip ticks on which
    nothing can be due without looking at any bucket.
    """

    backend = "python"

    def __init__(self):
        self._buckets: Dict[int, _Bucket] = {}
        self._timers: Dict[int, _Node] = {}
        # buckets in ascending ttl order, with their keys alongside for bisect
        self._order: List[_Bucket] = []
        self._keys: List[int] = []
        self._closest: Optional[int] = None
        self.reset_counters()

    # -- instrumentation -------------------------------------------------

    def reset_counters(self) -> None:
        self._calls = [0, 0, 0]
        self._visits = [0, 0, 0]
        self._scans = [0, 0, 0]

    @property
    def counters(self) -> OpCounters:
        return OpCounters.from_rows(
            (self._calls[i], self._visits[i], self._scans[i], 0) for i in range(3)
        )

    # -- queries ----------------------------------------------------------

    def outstanding_count(self) -> int:
        return len(self._timers)

    __len__ = outstanding_count

    def __contains__(self, id) -> bool:
        return id in self._timers

    def bucket_count(self) -> int:
        return len(self._buckets)

    def bucket_ttls(self) -> List[int]:
        return list(self._keys)

    def bucket_ids(self, ttl: int) -> list:
        """Ids in bucket ``ttl`` from head (oldest) to tail."""
        bucket = self._buckets.get(ttl)
        return [] if bucket is None else bucket.ids()

    @property
    def closest_expiration(self) -> Optional[int]:
        return self._closest

    def get(self, id) -> TimerRecord:
        try:
            return self._timers[id].record()
        except KeyError:
            raise UnknownId(id) from None

    # -- mutation ---------------------------------------------------------

    def start_timer(self, id, ttl: int, payload: bytes, now: int) -> None:
        check_ttl(ttl)
        if id in self._timers:
            raise DuplicateId(id)
        endtime = now + ttl
        bucket = self._buckets.get(ttl)
        if bucket is None:
            bucket = self._buckets[ttl] = _Bucket(ttl)
            i = bisect_left(self._keys, ttl)
            self._keys.insert(i, ttl)
            self._order.insert(i, bucket)
        node = _Node(id, ttl, endtime, payload, bucket)
        bucket.append(node)
        closest = self._closest
        if closest is None:
            # absent + empty store means "nothing outstanding"; absent after an
            # invalidation must stay absent or the bound could overshoot
            if not self._timers:
                self._closest = endtime
        elif endtime < closest:
            self._closest = endtime
        self._timers[id] = node
        self._calls[_START] += 1
        self._visits[_START] += 1

    def delete_timer(self, id, ttl_hint: Optional[int] = None) -> TimerRecord:
        node = self._timers.pop(id, None)
        if node is None:
            raise UnknownId(id)
        if node.endtime == self._closest:
            self._closest = None
        bucket = node.bucket
        bucket.unlink(node)
        node.bucket = None
        if bucket.size == 0:
            self._drop_bucket(bucket)
        self._calls[_DELETE] += 1
        self._visits[_DELETE] += 1
        return node.record()

    def _drop_bucket(self, bucket: _Bucket) -> None:
        del self._buckets[bucket.ttl]
        i = bisect_left(self._keys, bucket.ttl)
        del self._keys[i]
        del self._order[i]

    def per_tick_bookkeeping(self, now: int) -> List[ExpirationEvent]:
        self._calls[_TICK] += 1
        closest = self._closest
        if closest is not None and now < closest:
            return []
        events: List[ExpirationEvent] = []
        timers = self._timers
        visits = 0
        emptied = False
        new_closest = None
        for bucket in self._order:
            node = bucket.head
            visits += 1
            popped = 0
            while node.endtime <= now:
                del timers[node.id]
                events.append(ExpirationEvent(now, node.id, node.payload))
                popped += 1
                nxt = node.next
                node.next = node.bucket = None
                node = nxt
                if node is None:
                    break
                # cut the back link now so popped nodes are freed one at a time
                node.prev = None
                visits += 1
            if node is None:
                bucket.head = bucket.tail = None
                bucket.size = 0
                emptied = True
                continue
            if popped:
                bucket.head = node
                bucket.size -= popped
            if new_closest is None or node.endtime < new_closest:
                new_closest = node.endtime
        self._scans[_TICK] += len(self._order)
        self._visits[_TICK] += visits
        if emptied:
            keep = [b for b in self._order if b.size]
            for b in self._order:
                if not b.size:
                    del self._buckets[b.ttl]
            self._order = keep
            self._keys = [b.ttl for b in keep]
        self._closest = new_closest
        return events

