"""Deterministic workload generation and the line-oriented workload format.

File format, one operation per line, fields separated by single spaces::

    S <tick> <id> <ttl> <payload-hex>    start a timer
    D <tick> <id> <ttl>                  delete an outstanding timer
    H <final-tick>                       horizon terminator, always last

Ticks never decrease from one line to the next. Lines starting with ``#``
carry metadata (``key=value`` pairs) and are otherwise ignored.

Replay semantics used everywhere in the package: at tick 0 the ops stamped 0
are applied; then for each tick T = 1 .. final the clock advances to T,
bookkeeping runs, and the ops stamped T are applied.
"""

from __future__ import annotations

import hashlib
import io
import random
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Union

ARRIVALS = ("uniform", "burst")


class WorkloadError(ValueError):
    pass


class Op(NamedTuple):
    kind: str  # "S" or "D"
    tick: int
    id: int
    ttl: int
    payload: bytes = b""


def resolve_ttls(ttl_set: Union[str, Sequence[int], None], count: Optional[int]) -> List[int]:
    """Turn a ttl-set description into a sorted list of distinct ttls.

    ``ttl_set`` is either an explicit sequence / comma list (``"5,10,20"``),
    ``"inc:START:STEP"`` for START, START+STEP, ... or ``"pow2:START"`` for
    START, 2*START, 4*START, ...  The generators need ``count``.
    """
    if ttl_set is None:
        ttl_set = "inc:1:1"
    if isinstance(ttl_set, str) and ":" in ttl_set:
        kind, _, rest = ttl_set.partition(":")
        if count is None or count < 1:
            raise WorkloadError(f"ttl generator {ttl_set!r} needs a positive distinct-ttl count")
        try:
            args = [int(a) for a in rest.split(":")]
        except ValueError:
            raise WorkloadError(f"bad ttl generator {ttl_set!r}") from None
        if kind == "inc" and len(args) == 2:
            start, step = args
            if start < 1 or step < 1:
                raise WorkloadError("inc generator needs START >= 1 and STEP >= 1")
            return [start + i * step for i in range(count)]
        if kind == "pow2" and len(args) == 1:
            if args[0] < 1:
                raise WorkloadError("pow2 generator needs START >= 1")
            return [args[0] << i for i in range(count)]
        raise WorkloadError(f"unknown ttl generator {ttl_set!r}")
    if isinstance(ttl_set, str):
        try:
            values = [int(v) for v in ttl_set.split(",") if v.strip()]
        except ValueError:
            raise WorkloadError(f"bad ttl list {ttl_set!r}") from None
    else:
        values = [int(v) for v in ttl_set]
    values = sorted(set(values))
    if not values or values[0] < 1:
        raise WorkloadError("ttl values must be positive integers")
    if count is not None and count != len(values):
        raise WorkloadError(f"ttl list has {len(values)} distinct values, expected {count}")
    return values


@dataclass
class WorkloadSpec:
    n_timers: int
    distinct_ttls: Optional[int] = None
    ttl_values: Union[str, Sequence[int], None] = None
    delete_ratio: float = 0.0
    arrival: str = "uniform"
    horizon: int = 10_000
    seed: int = 0
    bursts: int = 8

    def validate(self) -> List[int]:
        if self.n_timers < 0:
            raise WorkloadError("n_timers must be >= 0")
        if not 0.0 <= self.delete_ratio <= 1.0:
            raise WorkloadError("delete_ratio must lie in [0, 1]")
        if self.arrival not in ARRIVALS:
            raise WorkloadError(f"arrival must be one of {ARRIVALS}")
        if self.horizon < 1:
            raise WorkloadError("horizon must be >= 1 tick")
        if not 0 <= self.seed < 2**64:
            raise WorkloadError("seed must be a 64-bit unsigned integer")
        if self.bursts < 1:
            raise WorkloadError("bursts must be >= 1")
        ttls = resolve_ttls(self.ttl_values, self.distinct_ttls)
        if self.n_timers and len(ttls) > self.n_timers:
            raise WorkloadError("distinct ttl count exceeds n_timers")
        return ttls


@dataclass
class Workload:
    ops: List[Op]
    final_tick: int
    meta: Dict[str, str] = field(default_factory=dict)

    @property
    def starts(self) -> int:
        return sum(1 for op in self.ops if op.kind == "S")

    @property
    def deletes(self) -> int:
        return sum(1 for op in self.ops if op.kind == "D")

    @property
    def distinct_ttls(self) -> int:
        return len({op.ttl for op in self.ops if op.kind == "S"})

    def digest(self) -> str:
        return hashlib.sha256(dumps(self).encode()).hexdigest()


def generate_workload(spec: WorkloadSpec) -> Workload:
    """Build a workload from ``spec``; the same spec always yields the same ops.

    Every ttl in the set is used at least once. Each timer is picked for
    deletion with probability ``delete_ratio``; its delete is placed on a
    uniformly chosen tick at which the timer is still outstanding.
    """
    ttls = spec.validate()
    rng = random.Random(spec.seed)
    n = spec.n_timers
    if n == 0:
        return Workload([], spec.horizon, _meta(spec, 0))

    assigned = list(ttls) + [rng.choice(ttls) for _ in range(n - len(ttls))]
    rng.shuffle(assigned)
    if spec.arrival == "uniform":
        ticks = sorted(rng.randrange(spec.horizon) for _ in range(n))
    else:
        burst_ticks = rng.sample(range(spec.horizon), min(spec.bursts, spec.horizon))
        ticks = sorted(rng.choice(burst_ticks) for _ in range(n))

    # ops within one tick are interleaved by a random sort key; ids follow
    # start order, and a same-tick delete always sorts after its start
    starts = sorted((tick, rng.random(), ttl) for tick, ttl in zip(ticks, assigned))
    keyed = []
    last_end = 0
    for i, (tick, key, ttl) in enumerate(starts):
        payload = rng.getrandbits(64).to_bytes(8, "big")
        keyed.append(((tick, key), Op("S", tick, i, ttl, payload)))
        end = tick + ttl
        last_end = max(last_end, end)
        if spec.delete_ratio and rng.random() < spec.delete_ratio:
            dtick = rng.randrange(tick, end)
            dkey = rng.random()
            if dtick == tick:
                dkey = key + (1.0 - key) * dkey
            keyed.append(((dtick, dkey), Op("D", dtick, i, ttl)))
    keyed.sort(key=lambda kv: kv[0])
    ops = [op for _, op in keyed]
    final = max(spec.horizon, last_end)
    return Workload(ops, final, _meta(spec, len(ttls)))


def _meta(spec: WorkloadSpec, t: int) -> Dict[str, str]:
    return {
        "seed": str(spec.seed),
        "n": str(spec.n_timers),
        "t": str(t),
        "delete_ratio": repr(spec.delete_ratio),
        "arrival": spec.arrival,
        "horizon": str(spec.horizon),
    }


def write_workload(workload: Workload, fh) -> None:
    if workload.meta:
        fh.write("# " + " ".join(f"{k}={v}" for k, v in workload.meta.items()) + "\n")
    for op in workload.ops:
        if op.kind == "S":
            fh.write(f"S {op.tick} {op.id} {op.ttl} {op.payload.hex()}\n")
        else:
            fh.write(f"D {op.tick} {op.id} {op.ttl}\n")
    fh.write(f"H {workload.final_tick}\n")


def dumps(workload: Workload) -> str:
    buf = io.StringIO()
    write_workload(workload, buf)
    return buf.getvalue()


def save_workload(workload: Workload, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        write_workload(workload, fh)


def parse_workload(lines: Iterable[str]) -> Workload:
    ops: List[Op] = []
    meta: Dict[str, str] = {}
    final = None
    last_tick = 0
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for item in line[1:].split():
                key, sep, value = item.partition("=")
                if sep:
                    meta[key] = value
            continue
        if final is not None:
            raise WorkloadError(f"line {lineno}: content after H terminator")
        fields = line.split()
        kind = fields[0]
        try:
            if kind == "S" and len(fields) in (4, 5):
                payload = bytes.fromhex(fields[4]) if len(fields) == 5 else b""
                op = Op("S", int(fields[1]), int(fields[2]), int(fields[3]), payload)
            elif kind == "D" and len(fields) == 4:
                op = Op("D", int(fields[1]), int(fields[2]), int(fields[3]))
            elif kind == "H" and len(fields) == 2:
                final = int(fields[1])
                if final < last_tick:
                    raise WorkloadError(f"line {lineno}: final tick {final} precedes last op tick {last_tick}")
                continue
            else:
                raise WorkloadError(f"line {lineno}: malformed record {line!r}")
        except ValueError as exc:
            if isinstance(exc, WorkloadError):
                raise
            raise WorkloadError(f"line {lineno}: malformed record {line!r}") from None
        if op.tick < last_tick:
            raise WorkloadError(f"line {lineno}: tick {op.tick} goes backwards (after {last_tick})")
        if op.tick < 0 or op.ttl < 1 or op.id < 0:
            raise WorkloadError(f"line {lineno}: negative tick/id or non-positive ttl")
        last_tick = op.tick
        ops.append(op)
    if final is None:
        raise WorkloadError("missing H terminator line")
    return Workload(ops, final, meta)


def load_workload(path) -> Workload:
    with open(path, encoding="ascii") as fh:
        return parse_workload(fh)


def validate_workload(workload: Workload) -> Dict[str, int]:
    """Check that every delete targets a then-outstanding timer and no start
    reuses an outstanding id. Returns simple op counts."""
    ends: Dict[int, tuple] = {}  # id -> (ttl, endtime) for live timers
    starts = deletes = 0
    last = 0
    for op in workload.ops:
        if op.tick < last:
            raise WorkloadError(f"tick {op.tick} goes backwards")
        last = op.tick
        live = ends.get(op.id)
        # a timer whose endtime is <= tick has already fired by the time
        # ops stamped with that tick are applied
        outstanding = live is not None and live[1] > op.tick
        if op.kind == "S":
            if outstanding:
                raise WorkloadError(f"start of id {op.id} at tick {op.tick} while it is outstanding")
            if op.ttl < 1:
                raise WorkloadError(f"non-positive ttl for id {op.id}")
            ends[op.id] = (op.ttl, op.tick + op.ttl)
            starts += 1
        elif op.kind == "D":
            if not outstanding:
                raise WorkloadError(f"delete of id {op.id} at tick {op.tick} which is not outstanding")
            if live[0] != op.ttl:
                raise WorkloadError(f"delete of id {op.id} carries ttl {op.ttl}, timer has {live[0]}")
            del ends[op.id]
            deletes += 1
        else:
            raise WorkloadError(f"unknown op kind {op.kind!r}")
    if workload.final_tick < last:
        raise WorkloadError("final tick precedes the last op")
    unfired = sum(1 for _, end in ends.values() if end > workload.final_tick)
    return {"starts": starts, "deletes": deletes, "unfired": unfired}
