# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled Lawn store. Mirrors ``lawn._pylawn.LawnStore`` call for call."""

from bisect import bisect_left

from lawn.core import (
    DuplicateId,
    ExpirationEvent,
    OpCounters,
    TimerRecord,
    UnknownId,
    check_ttl,
)

cdef enum:
    START = 0
    DELETE = 1
    TICK = 2


cdef class _Node:
    cdef object id
    cdef long long ttl
    cdef long long endtime
    cdef object payload
    cdef _Node prev
    cdef _Node next
    cdef _Bucket bucket

    cdef object record(self):
        return TimerRecord(self.id, self.ttl, self.endtime, self.payload)


cdef class _Bucket:
    cdef long long ttl
    cdef _Node head
    cdef _Node tail
    cdef Py_ssize_t size

    cdef inline void append(self, _Node node):
        cdef _Node tail = self.tail
        node.prev = tail
        if tail is None:
            self.head = node
        else:
            tail.next = node
        self.tail = node
        self.size += 1

    cdef inline void unlink(self, _Node node):
        cdef _Node prev = node.prev
        cdef _Node nxt = node.next
        if prev is None:
            self.head = nxt
        else:
            prev.next = nxt
        if nxt is None:
            self.tail = prev
        else:
            nxt.prev = prev
        node.prev = None
        node.next = None
        self.size -= 1


cdef class LawnStore:
    """TTL-bucketed timer store (compiled)."""

    cdef dict _buckets
    cdef dict _timers
    cdef list _order
    cdef list _keys
    cdef long long _closest
    cdef bint _has_closest
    cdef long long _calls[3]
    cdef long long _visits[3]
    cdef long long _scans[3]

    backend = "cython"

    def __cinit__(self):
        self._buckets = {}
        self._timers = {}
        self._order = []
        self._keys = []
        self._has_closest = False
        self._closest = 0
        self.reset_counters()

    def reset_counters(self):
        cdef int i
        for i in range(3):
            self._calls[i] = 0
            self._visits[i] = 0
            self._scans[i] = 0

    @property
    def counters(self):
        return OpCounters.from_rows(
            [(self._calls[i], self._visits[i], self._scans[i], 0) for i in range(3)]
        )

    def outstanding_count(self):
        return len(self._timers)

    def __len__(self):
        return len(self._timers)

    def __contains__(self, id):
        return id in self._timers

    def bucket_count(self):
        return len(self._buckets)

    def bucket_ttls(self):
        return list(self._keys)

    def bucket_ids(self, ttl):
        cdef _Bucket bucket = self._buckets.get(ttl)
        cdef _Node node
        out = []
        if bucket is None:
            return out
        node = bucket.head
        while node is not None:
            out.append(node.id)
            node = node.next
        return out

    @property
    def closest_expiration(self):
        return self._closest if self._has_closest else None

    def get(self, id):
        cdef _Node node = self._timers.get(id)
        if node is None:
            raise UnknownId(id)
        return node.record()

    def start_timer(self, id, ttl, payload, long long now):
        cdef long long t
        cdef long long endtime
        cdef _Bucket bucket
        cdef _Node node
        cdef Py_ssize_t i
        if type(ttl) is int and ttl >= 1:
            t = ttl
        else:
            t = check_ttl(ttl)
        if id in self._timers:
            raise DuplicateId(id)
        if now > 9223372036854775807 - t:
            raise OverflowError("endtime exceeds 2**63 - 1")
        endtime = now + t
        bucket = self._buckets.get(ttl)
        if bucket is None:
            bucket = _Bucket()
            bucket.ttl = t
            self._buckets[ttl] = bucket
            i = bisect_left(self._keys, ttl)
            self._keys.insert(i, ttl)
            self._order.insert(i, bucket)
        node = _Node()
        node.id = id
        node.ttl = t
        node.endtime = endtime
        node.payload = payload
        node.bucket = bucket
        bucket.append(node)
        if not self._has_closest:
            if not self._timers:
                self._closest = endtime
                self._has_closest = True
        elif endtime < self._closest:
            self._closest = endtime
        self._timers[id] = node
        self._calls[START] += 1
        self._visits[START] += 1

    def delete_timer(self, id, ttl_hint=None):
        cdef _Node node = self._timers.pop(id, None)
        cdef _Bucket bucket
        cdef Py_ssize_t i
        if node is None:
            raise UnknownId(id)
        if self._has_closest and node.endtime == self._closest:
            self._has_closest = False
        bucket = node.bucket
        bucket.unlink(node)
        node.bucket = None
        if bucket.size == 0:
            del self._buckets[bucket.ttl]
            i = bisect_left(self._keys, bucket.ttl)
            del self._keys[i]
            del self._order[i]
        self._calls[DELETE] += 1
        self._visits[DELETE] += 1
        return node.record()

    def per_tick_bookkeeping(self, long long now):
        cdef list events
        cdef list order = self._order
        cdef dict timers = self._timers
        cdef _Bucket bucket
        cdef _Node node
        cdef _Node nxt
        cdef long long visits = 0
        cdef long long popped
        cdef long long new_closest = 0
        cdef bint has_new = False
        cdef bint emptied = False
        cdef Py_ssize_t i, nb = len(order)

        self._calls[TICK] += 1
        if self._has_closest and now < self._closest:
            return []
        events = []
        for i in range(nb):
            bucket = <_Bucket>order[i]
            node = bucket.head
            visits += 1
            popped = 0
            while node.endtime <= now:
                del timers[node.id]
                events.append(tuple.__new__(ExpirationEvent, (now, node.id, node.payload)))
                popped += 1
                nxt = node.next
                node.next = None
                node.bucket = None
                node = nxt
                if node is None:
                    break
                # cut the back link now so popped nodes are freed one at a time
                node.prev = None
                visits += 1
            if node is None:
                bucket.head = None
                bucket.tail = None
                bucket.size = 0
                emptied = True
                continue
            if popped:
                bucket.head = node
                bucket.size -= popped
            if not has_new or node.endtime < new_closest:
                new_closest = node.endtime
                has_new = True
        self._scans[TICK] += nb
        self._visits[TICK] += visits
        if emptied:
            keep = []
            for i in range(nb):
                bucket = <_Bucket>order[i]
                if bucket.size:
                    keep.append(bucket)
                else:
                    del self._buckets[bucket.ttl]
            self._order = keep
            self._keys = [(<_Bucket>b).ttl for b in keep]
        self._has_closest = has_new
        self._closest = new_closest
        return events
