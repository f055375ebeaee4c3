"""Lawn buckets partitioned across independent shards.

A ttl always routes to shard ``ttl % K``, so each bucket has exactly one
owner and no two shards ever touch the same state. With ``threaded=True``
every shard lives on its own worker thread and the coordinator talks to it
only through request/reply queues; otherwise the shards are driven inline.
Both modes produce the same event stream.
"""

from __future__ import annotations

import queue
import threading
from typing import Callable, List, Optional

from .core import ExpirationEvent, OpCounters, TimerRecord, check_ttl
from .lawn_store import LawnStore

_STOP = object()


class _Worker:
    """Owns one shard; executes requests strictly in arrival order."""

    def __init__(self, store, name: str):
        self.store = store
        self.requests: queue.SimpleQueue = queue.SimpleQueue()
        self.replies: queue.SimpleQueue = queue.SimpleQueue()
        self.thread = threading.Thread(target=self._run, name=name, daemon=True)
        self.thread.start()

    def _run(self) -> None:
        store = self.store
        while True:
            msg = self.requests.get()
            if msg is _STOP:
                return
            method, args = msg
            try:
                if method == "counters":
                    result = store.counters
                else:
                    result = getattr(store, method)(*args)
            except Exception as exc:  # handed back to the coordinator
                self.replies.put((False, exc))
            else:
                self.replies.put((True, result))

    def send(self, method: str, *args) -> None:
        self.requests.put((method, args))

    def receive(self):
        ok, value = self.replies.get()
        if not ok:
            raise value
        return value

    def call(self, method: str, *args):
        self.send(method, *args)
        return self.receive()

    def stop(self) -> None:
        self.requests.put(_STOP)
        self.thread.join()


class _Inline:
    def __init__(self, store):
        self.store = store
        self._pending = []

    def call(self, method: str, *args):
        if method == "counters":
            return self.store.counters
        return getattr(self.store, method)(*args)

    def send(self, method: str, *args) -> None:
        self._pending.append((method, args))

    def receive(self):
        method, args = self._pending.pop(0)
        return self.call(method, *args)

    def stop(self) -> None:
        pass


class ShardedLawn:
    def __init__(
        self,
        shards: int = 1,
        *,
        threaded: bool = False,
        store_factory: Optional[Callable[[], object]] = None,
    ):
        if shards < 1:
            raise ValueError("need at least one shard")
        factory = store_factory or LawnStore
        self.k = shards
        self.threaded = threaded
        if threaded:
            self._workers = [_Worker(factory(), f"lawn-shard-{i}") for i in range(shards)]
        else:
            self._workers = [_Inline(factory()) for _ in range(shards)]

    def route(self, ttl: int) -> int:
        return ttl % self.k

    def start_timer(self, id, ttl: int, payload: bytes, now: int) -> None:
        check_ttl(ttl)
        self._workers[ttl % self.k].call("start_timer", id, ttl, payload, now)

    def delete_timer(self, id, ttl_hint: Optional[int] = None) -> TimerRecord:
        if ttl_hint is None:
            raise ValueError("sharded delete needs the timer's ttl to find its shard")
        return self._workers[ttl_hint % self.k].call("delete_timer", id)

    def per_tick_bookkeeping(self, now: int) -> List[ExpirationEvent]:
        # fan out, then gather in shard order; every shard finishes tick
        # `now` before the caller can issue anything for the next one
        for w in self._workers:
            w.send("per_tick_bookkeeping", now)
        events: List[ExpirationEvent] = []
        error = None
        for w in self._workers:
            try:
                events.extend(w.receive())
            except Exception as exc:
                # keep draining so no reply is left behind for the next call
                error = error or exc
        if error is not None:
            raise error
        return events

    def outstanding_count(self) -> int:
        return sum(w.call("outstanding_count") for w in self._workers)

    __len__ = outstanding_count

    def bucket_count(self) -> int:
        return sum(w.call("bucket_count") for w in self._workers)

    def shard_counters(self) -> List[OpCounters]:
        return [w.call("counters") for w in self._workers]

    @property
    def counters(self) -> OpCounters:
        return OpCounters.total(self.shard_counters())

    def reset_counters(self) -> None:
        for w in self._workers:
            w.call("reset_counters")

    def shard_outstanding(self) -> List[int]:
        return [w.call("outstanding_count") for w in self._workers]

    def close(self) -> None:
        for w in self._workers:
            w.stop()
        self._workers = []

    def __enter__(self):
        return self

    def __exit__(self, *exc) -> None:
        self.close()
