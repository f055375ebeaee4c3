"""Timer stores: the TTL-bucketed Lawn store and its comparison baselines."""

__version__ = "0.1.0"

from .core import (
    DuplicateId,
    ExpirationEvent,
    InvalidTtl,
    OpCounters,
    OpStats,
    RealClock,
    SimClock,
    TimerError,
    TimerRecord,
    TimerStore,
    UnknownId,
    clock_advance,
    drive_until,
)
from .lawn_store import BACKEND, LawnStore, PyLawnStore
from .baselines import HashedWheel, HeapStore, OracleStore
from .sharding import ShardedLawn
from .workload import Workload, WorkloadError, WorkloadSpec, generate_workload
from .replay import oracle_replay, replay, tick_multisets

__all__ = [
    "BACKEND", "DuplicateId", "ExpirationEvent", "HashedWheel", "HeapStore",
    "InvalidTtl", "LawnStore", "OpCounters", "OpStats", "OracleStore",
    "PyLawnStore", "RealClock", "ShardedLawn", "SimClock", "TimerError",
    "TimerRecord", "TimerStore", "UnknownId", "Workload", "WorkloadError",
    "WorkloadSpec", "clock_advance", "drive_until", "generate_workload",
    "oracle_replay", "replay", "tick_multisets",
]
