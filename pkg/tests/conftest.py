from collections import defaultdict

import pytest

from lawn.lawn_store import BACKENDS

ACCEPTANCE_LINES = []


@pytest.fixture(params=sorted(BACKENDS))
def lawn_cls(request):
    """Every available Lawn backend, so the fallback is always exercised."""
    return BACKENDS[request.param]


def closed_form_fires(workload):
    """Expected per-tick multisets computed without running any store.

    Under the replay rules a timer started at tick s with ttl d fires at
    exactly s + d unless a delete for it appears first; nothing with an
    endtime past the final tick fires.
    """
    deleted = {op.id for op in workload.ops if op.kind == "D"}
    fires = defaultdict(list)
    for op in workload.ops:
        if op.kind == "S" and op.id not in deleted:
            end = op.tick + op.ttl
            if end <= workload.final_tick:
                fires[end].append((op.id, op.payload))
    return {tick: tuple(sorted(items)) for tick, items in fires.items()}


def record_acceptance(name, ok, detail=""):
    ACCEPTANCE_LINES.append((name, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
