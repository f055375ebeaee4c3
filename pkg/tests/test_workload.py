import io

import pytest

from lawn.workload import (
    Op,
    Workload,
    WorkloadError,
    WorkloadSpec,
    dumps,
    generate_workload,
    load_workload,
    parse_workload,
    resolve_ttls,
    save_workload,
    validate_workload,
)


def test_three_starts_single_ttl():
    workload = generate_workload(WorkloadSpec(3, 1, [5]))
    assert [op.kind for op in workload.ops] == ["S", "S", "S"]
    assert {op.ttl for op in workload.ops} == {5}


def test_same_seed_same_file():
    spec = WorkloadSpec(500, 7, "pow2:2", delete_ratio=0.4, arrival="burst", seed=99)
    assert dumps(generate_workload(spec)) == dumps(generate_workload(spec))
    other = WorkloadSpec(500, 7, "pow2:2", delete_ratio=0.4, arrival="burst", seed=100)
    assert dumps(generate_workload(spec)) != dumps(generate_workload(other))


def test_delete_ratio_half():
    workload = generate_workload(WorkloadSpec(1000, 10, "inc:1:1", delete_ratio=0.5, seed=3))
    counts = validate_workload(workload)
    assert counts["starts"] == 1000
    # binomial(1000, 0.5): 5 sigma is about 79
    assert abs(counts["deletes"] - 500) < 80
    assert counts["unfired"] == 0


def test_every_ttl_used():
    workload = generate_workload(WorkloadSpec(50, 50, "inc:10:10", seed=1))
    assert workload.distinct_ttls == 50


def test_ids_in_start_order_and_ticks_sorted():
    workload = generate_workload(WorkloadSpec(2000, 5, "inc:1:4", delete_ratio=0.3, seed=2))
    ticks = [op.tick for op in workload.ops]
    assert ticks == sorted(ticks)
    start_ids = [op.id for op in workload.ops if op.kind == "S"]
    assert start_ids == sorted(start_ids)
    assert workload.final_tick >= max(op.tick + op.ttl for op in workload.ops if op.kind == "S")


def test_burst_arrival_uses_few_ticks():
    workload = generate_workload(WorkloadSpec(1000, 3, [2, 4, 8], arrival="burst", bursts=5, seed=0))
    assert len({op.tick for op in workload.ops if op.kind == "S"}) <= 5


def test_empty_workload():
    workload = generate_workload(WorkloadSpec(0, None, [3], horizon=10))
    assert workload.ops == [] and workload.final_tick == 10


@pytest.mark.parametrize("text,count,expected", [
    ("5,10,20", None, [5, 10, 20]),
    ("20,5,5,10", 3, [5, 10, 20]),
    ("inc:3:2", 4, [3, 5, 7, 9]),
    ("pow2:1", 5, [1, 2, 4, 8, 16]),
    ([7, 3], 2, [3, 7]),
])
def test_resolve_ttls(text, count, expected):
    assert resolve_ttls(text, count) == expected


@pytest.mark.parametrize("text,count", [
    ("0,1", None), ("inc:0:1", 2), ("pow2:1", None), ("lin:1:1", 3), ("5,x", None), ("5,10", 3),
])
def test_resolve_ttls_rejects(text, count):
    with pytest.raises(WorkloadError):
        resolve_ttls(text, count)


@pytest.mark.parametrize("changes", [
    {"n_timers": -1}, {"delete_ratio": 1.5}, {"arrival": "poisson"}, {"horizon": 0},
    {"seed": -1}, {"seed": 2**64}, {"n_timers": 2, "distinct_ttls": 3, "ttl_values": "inc:1:1"},
])
def test_invalid_spec(changes):
    fields = dict(n_timers=10, distinct_ttls=2, ttl_values="inc:1:1")
    fields.update(changes)
    with pytest.raises(WorkloadError):
        generate_workload(WorkloadSpec(**fields))


def test_file_round_trip(tmp_path):
    workload = generate_workload(WorkloadSpec(300, 4, "inc:2:3", delete_ratio=0.3, seed=12))
    path = tmp_path / "w.txt"
    save_workload(workload, path)
    loaded = load_workload(path)
    assert loaded.ops == workload.ops
    assert loaded.final_tick == workload.final_tick
    assert loaded.meta["seed"] == "12"
    text = path.read_text()
    assert text.splitlines()[-1] == f"H {workload.final_tick}"
    assert text.splitlines()[1].startswith("S ")


def test_parse_line_formats():
    w = parse_workload(io.StringIO("S 0 1 5 00ff\nS 0 2 3\nD 1 1 5\nH 9\n"))
    assert w.ops == [Op("S", 0, 1, 5, b"\x00\xff"), Op("S", 0, 2, 3, b""), Op("D", 1, 1, 5)]
    assert w.final_tick == 9


@pytest.mark.parametrize("text", [
    "S 0 1 5 00\n",                 # no terminator
    "S 0 1 5 zz\nH 9\n",            # bad hex
    "S 2 1 5\nS 1 2 5\nH 9\n",      # ticks go backwards
    "S 0 1 0\nH 9\n",               # zero ttl
    "X 0 1 5\nH 9\n",               # unknown kind
    "S 0 1\nH 9\n",                 # too few fields
    "S 5 1 5\nH 3\n",               # terminator before last op
    "H 3\nS 5 1 5\n",               # op after terminator
])
def test_parse_rejects(text):
    with pytest.raises(WorkloadError):
        parse_workload(io.StringIO(text))


@pytest.mark.parametrize("ops", [
    [Op("D", 0, 1, 5)],                                     # never started
    [Op("S", 0, 1, 5), Op("D", 5, 1, 5)],                   # already fired at tick 5
    [Op("S", 0, 1, 5), Op("D", 1, 1, 6)],                   # wrong ttl
    [Op("S", 0, 1, 5), Op("S", 2, 1, 5)],                   # id still outstanding
    [Op("S", 0, 1, 5), Op("D", 1, 1, 5), Op("D", 2, 1, 5)],  # double delete
])
def test_validate_rejects(ops):
    with pytest.raises(WorkloadError):
        validate_workload(Workload(ops, 20))


def test_validate_allows_id_reuse_after_expiry():
    counts = validate_workload(Workload([Op("S", 0, 1, 2), Op("S", 2, 1, 2)], 10))
    assert counts == {"starts": 2, "deletes": 0, "unfired": 0}


@pytest.mark.parametrize("seed", range(20))
def test_generated_workloads_validate(seed):
    spec = WorkloadSpec(800, 1 + seed % 9, "inc:1:3", delete_ratio=(seed % 4) / 4,
                        arrival="burst" if seed % 3 == 0 else "uniform", horizon=700, seed=seed)
    counts = validate_workload(generate_workload(spec))
    assert counts["starts"] == 800 and counts["unfired"] == 0


def test_ops_interleave_within_a_tick():
    workload = generate_workload(WorkloadSpec(3000, 4, "inc:2:3", delete_ratio=0.5, horizon=300, seed=4))
    prev = None
    start_after_delete = False
    for op in workload.ops:
        if prev is not None and prev.tick == op.tick and prev.kind == "D" and op.kind == "S":
            start_after_delete = True
        prev = op
    assert start_after_delete
    validate_workload(workload)
