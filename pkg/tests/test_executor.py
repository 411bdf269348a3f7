import random

import pytest

from rawdb.errors import TaskPanickedError
from rawdb.executor import ExecutionTrace, Task, TaskGraph, WorkerPool, execute
from rawdb.executor.compile import compile_tasks
from rawdb.frontend import bind, parse
from rawdb.planner import build_logical_plan, convert_to_engine_plan, to_physical


def make_graph(entries):
    """entries: (id, fn, inputs)"""
    g = TaskGraph()
    for tid, fn, inputs in entries:
        g.add(Task(id=tid, fn=fn, inputs=inputs))
    return g


def test_diamond_runs_each_task_once_d_last():
    g = make_graph([
        ("A", lambda: 1, []),
        ("B", lambda a: a + 1, ["A"]),
        ("C", lambda a: a + 2, ["A"]),
        ("D", lambda b, c: b * c, ["B", "C"]),
    ])
    trace = ExecutionTrace()
    out = execute(g, WorkerPool(3), trace)
    assert out == {"D": 6}
    starts = [e[2]["task"] for e in trace.of_kind("start")]
    assert sorted(starts) == ["A", "B", "C", "D"]
    assert starts[-1] == "D"


def test_cycle_detected():
    g = make_graph([
        ("A", lambda b: b, ["B"]),
        ("B", lambda a: a, ["A"]),
    ])
    with pytest.raises(ValueError):
        execute(g, WorkerPool(1))


def test_unknown_edge_endpoint():
    g = make_graph([("A", lambda x: x, ["missing"])])
    with pytest.raises(ValueError):
        g.validate()


def test_task_error_propagates_without_hang():
    def boom(a):
        raise RuntimeError("bad")

    g = make_graph([
        ("A", lambda: 1, []),
        ("B", boom, ["A"]),
        ("C", lambda a: a, ["A"]),
    ])
    with pytest.raises(TaskPanickedError) as err:
        execute(g, WorkerPool(2))
    assert err.value.task_id == "B"
    assert isinstance(err.value.cause, RuntimeError)


def test_empty_graph():
    assert execute(TaskGraph(), WorkerPool(2)) == {}


def random_dag(rng: random.Random) -> TaskGraph:
    g = TaskGraph()
    n_layers = rng.randint(1, 5)
    previous: list[str] = []
    counter = 0
    for layer in range(n_layers):
        width = rng.randint(1, 6)
        layer_ids = []
        for _ in range(width):
            tid = f"t{counter}"
            counter += 1
            if previous and rng.random() < 0.8:
                inputs = rng.sample(previous, rng.randint(1, min(3, len(previous))))
            else:
                inputs = []
            salt = counter  # deterministic per-task contribution

            def fn(*ins, salt=salt):
                return salt + sum(ins)

            g.add(Task(id=tid, fn=fn, inputs=inputs))
            layer_ids.append(tid)
        previous = layer_ids
    return g


@pytest.mark.parametrize("seed", range(200))
def test_exactly_once_and_determinism_random_dags(seed):
    rng = random.Random(seed)
    entries = random_dag(rng)
    results = {}
    for workers in (1, 2, 8):
        trace = ExecutionTrace()
        out = execute(entries, WorkerPool(workers), trace)
        starts = [e[2]["task"] for e in trace.of_kind("start")]
        assert sorted(starts) == sorted(entries.tasks)  # exactly once
        results[workers] = out
    assert results[1] == results[2] == results[8]


def test_release_safety_no_read_after_release():
    rng = random.Random(1234)
    for _ in range(20):
        g = random_dag(rng)
        trace = ExecutionTrace()
        execute(g, WorkerPool(4), trace)
        released_at = {}
        for seq, kind, fields in trace.events:
            if kind == "release":
                released_at[fields["ref"]] = seq
        for seq, kind, fields in trace.events:
            if kind == "read":
                ref = fields["ref"]
                assert released_at.get(ref, float("inf")) > seq


def test_sinks_never_released():
    g = make_graph([("A", lambda: 5, []), ("B", lambda a: a, ["A"])])
    trace = ExecutionTrace()
    out = execute(g, WorkerPool(2), trace)
    assert out == {"B": 5}
    released = {e[2]["ref"] for e in trace.of_kind("release")}
    assert "B" not in released
    assert "A" in released


def test_transfers_accounted_for_remote_reads():
    # two tasks forced onto different workers: B must fetch A's output
    g = make_graph([
        ("A", lambda: [(1, 2), (3, 4)], []),
        ("A2", lambda: [(5, 6)], []),
        ("B", lambda a, b: a + b, ["A", "A2"]),
    ])
    pool = WorkerPool(2)
    trace = ExecutionTrace()
    execute(g, pool, trace)
    reads = trace.of_kind("read")
    remote = [e for e in reads if e[2]["remote"] == 1]
    assert pool.total_transferred == sum(e[2]["bytes"] for e in remote)
    assert pool.total_transferred > 0


def test_single_worker_never_transfers():
    g = make_graph([
        ("A", lambda: [(1,)] * 10, []),
        ("B", lambda a: a, ["A"]),
        ("C", lambda a, b: len(a) + len(b), ["A", "B"]),
    ])
    pool = WorkerPool(1)
    execute(g, pool, ExecutionTrace())
    assert pool.total_transferred == 0


def test_trace_dump_is_line_oriented():
    g = make_graph([("A", lambda: [(1, 2)], []), ("B", lambda a: a, ["A"])])
    trace = ExecutionTrace()
    execute(g, WorkerPool(2), trace)
    lines = trace.to_text().splitlines()
    assert all(line.startswith("seq=") for line in lines)
    assert any("event=start task=A worker=" in line for line in lines)
    assert any("event=read" in line and "bytes=" in line for line in lines)
    assert any("event=release ref=A" in line for line in lines)


def test_one_task_at_a_time_per_worker():
    g = random_dag(random.Random(7))
    trace = ExecutionTrace()
    execute(g, WorkerPool(2), trace)
    busy = {0: None, 1: None}
    for seq, kind, fields in trace.events:
        if kind == "start":
            assert busy[fields["worker"]] is None
            busy[fields["worker"]] = fields["task"]
        elif kind == "end":
            assert busy[fields["worker"]] == fields["task"]
            busy[fields["worker"]] = None


# --- compile shapes ---


def compiled_for(engine, sql, **kw):
    parsed, _ = parse(sql)
    bound = bind(parsed, engine.catalog, engine.udfs)
    lp = build_logical_plan(bound)
    sorted_tables = {
        t: engine.catalog.table(t).sort_by
        for t in parsed.from_tables
        if engine.catalog.table(t).sort_by and engine.index_for(t) is not None
    }
    pp = to_physical(lp, bound.table_schemas, sorted_tables)
    ep = convert_to_engine_plan(pp)
    relations = {t: engine.relation(t) for t in parsed.from_tables}
    indexes = {}
    for t in parsed.from_tables:
        idx = engine.index_for(t)
        if idx is not None:
            indexes[(t, engine.catalog.table(t).sort_by)] = idx
    return compile_tasks(ep, relations, indexes, udf_registry=engine.udfs, **kw)


def test_filter_is_partition_parallel(write_file):
    from rawdb import Engine, EngineConfig

    body = "".join(f"{i}|{i}|\n" for i in range(50))
    p = write_file("t.tbl", body)
    eng = Engine(EngineConfig(partition_size=10))
    eng.register_table("t", p, "tbl")
    compiled = compiled_for(eng, "select col1 from t where col2 < 25")
    filter_tasks = [tid for tid in compiled.graph.tasks if ".p" in tid and tid.startswith("k2")]
    assert len(filter_tasks) == 5


def test_empty_relation_compiles_to_empty_sink(write_file):
    from rawdb import Engine, EngineConfig
    from rawdb.relation import INT64, Schema

    p = write_file("t.tbl", "1|\n")
    eng = Engine(EngineConfig(partition_size=10))
    eng.register_table("t", p, "tbl", schema=Schema.of(("a", INT64)))
    # forcing an empty relation: filter everything out upstream is runtime,
    # so register an empty partitioned relation directly
    rel = eng.relation("t")
    rel.partitions.clear()
    compiled = compiled_for(eng, "select a from t")
    scan_tasks = [t for t in compiled.graph.tasks if t.startswith("k1.p")]
    assert scan_tasks == []
    assert len(compiled.result_refs) == 1
    out = execute(compiled.graph, WorkerPool(2))
    assert out[compiled.result_refs[0]] == []


def test_join_task_shape_and_lazy_pruning(tiny_engine):
    compiled = compiled_for(
        tiny_engine,
        "select o_orderkey, l_quantity from orders, lineitem where o_orderkey = l_orderkey and o_orderkey < 5",
    )
    ids = list(compiled.graph.tasks)
    assert any(".ann" in t for t in ids)
    assert any(".sel" in t for t in ids)
    assert any(".join" in t for t in ids)
    out = execute(compiled.graph, WorkerPool(4))
    n_line_parts = len(tiny_engine.relation("lineitem").partitions)
    stats = next(iter(compiled.join_stats.values()))
    assert len(stats.touched) + len(stats.pruned) == n_line_parts
    assert len(stats.touched) >= 1
