"""Compile an engine plan into a task graph over partitions.

Partition-parallel operators (read_table, filters, select_columns, hash-join
probe, index annotate) get one task per input partition. The indexed join
expands into its three parallel stages: annotate every probe-side partition,
select the probe tuples for each build-side ordinal, then join each ordinal
against exactly that partition, fetched lazily so ordinals with no probe
tuples never read (or move) their partition. Fan-in operators (groupby_agg,
sort_values, head, apply_udf, hash build) are single tasks.

Group-by work is delegated to the aggregation module with the configured
strategy; the task runs on one worker and parallelizes internally.
"""

from __future__ import annotations

import operator
import threading
from dataclasses import dataclass, field

from .. import aggregation
from ..errors import UnknownOperatorTypeError
from ..frontend.ast import BinaryOp, ColumnRef, Comparison, Literal
from ..learned_index import probe
from ..planner.engine_plan import EnginePlan
from .graph import Task, TaskGraph

_CMP = {
    "=": operator.eq,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "<>": operator.ne,
}

_ARITH = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
    "/": operator.truediv,
}


@dataclass
class JoinStats:
    touched: set = field(default_factory=set)
    pruned: set = field(default_factory=set)


@dataclass
class CompiledQuery:
    graph: TaskGraph
    result_refs: list[str]
    result_layout: list[tuple[str, str]]
    udf_result: bool = False
    join_stats: dict = field(default_factory=dict)  # join op key -> JoinStats
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def partitions_pruned(self) -> int:
        return sum(len(js.pruned) for js in self.join_stats.values())

    @property
    def partitions_touched(self) -> int:
        return sum(len(js.touched) for js in self.join_stats.values())


def compile_expr(expr, names: list[str]):
    """Row expression -> python closure over the row tuple."""
    if isinstance(expr, ColumnRef):
        i = names.index(expr.name)
        return lambda row: row[i]
    if isinstance(expr, Literal):
        v = expr.value
        return lambda row: v
    if isinstance(expr, BinaryOp):
        lf = compile_expr(expr.left, names)
        rf = compile_expr(expr.right, names)
        op = _ARITH[expr.op]
        return lambda row: op(lf(row), rf(row))
    raise UnknownOperatorTypeError(f"cannot compile expression {expr!r}")


def compile_pred(pred: Comparison, names: list[str]):
    lf = compile_expr(pred.left, names)
    rf = compile_expr(pred.right, names)
    op = _CMP[pred.op]
    return lambda row: op(lf(row), rf(row))


def compile_tasks(
    ep: EnginePlan,
    relations: dict,
    indexes: dict | None = None,
    udf_registry=None,
    agg_strategy: str = "partition_and_aggregate",
    agg_threads: int = 1,
) -> CompiledQuery:
    indexes = indexes or {}
    graph = TaskGraph()
    refs: dict[str, list[str]] = {}  # op key -> output partition refs
    compiled = CompiledQuery(graph=graph, result_refs=[], result_layout=[])

    def names_of(key: str) -> list[str]:
        return ep.name_env[key]["columns"]

    for op in ep.ops:
        if op.op == "read_table":
            refs[op.key] = _compile_read_table(graph, op, relations)
        elif op.op == "filters":
            refs[op.key] = _compile_rowmap(
                graph, op.key, refs[op.children[0]],
                _filter_fn(op.meta["pred"], names_of(op.children[0])),
            )
        elif op.op == "select_columns":
            refs[op.key] = _compile_rowmap(
                graph, op.key, refs[op.children[0]],
                _project_fn(op.meta, names_of(op.children[0])),
            )
        elif op.op == "merge_join":
            refs[op.key] = _compile_join(graph, op, refs, ep, relations, indexes, compiled)
        elif op.op == "groupby_agg":
            refs[op.key] = _compile_aggregate(
                graph, op, refs[op.children[0]], names_of(op.children[0]),
                agg_strategy, agg_threads,
            )
        elif op.op == "sort_values":
            refs[op.key] = _compile_sort(
                graph, op, refs[op.children[0]], names_of(op.children[0])
            )
        elif op.op == "head":
            refs[op.key] = _compile_head(graph, op, refs[op.children[0]])
        elif op.op == "apply_udf":
            refs[op.key] = _compile_udf(
                graph, op, refs[op.children[0]], names_of(op.children[0]), udf_registry
            )
            compiled.udf_result = True
        else:
            raise UnknownOperatorTypeError(op.op)

    final = ep.ops[-1]
    out_refs = refs[final.key]
    if not out_refs:
        sink = Task(id=f"{final.key}.empty", fn=lambda: [])
        graph.add(sink)
        out_refs = [sink.id]
    compiled.result_refs = out_refs
    info = ep.name_env[final.key]
    compiled.result_layout = list(zip(info["columns"], info["types"]))
    return compiled


def _compile_read_table(graph: TaskGraph, op, relations) -> list[str]:
    rel = relations[op.meta["table"]]
    want = op.meta["columns"]
    all_names = rel.schema.names
    out = []
    if want == all_names:
        for part in rel.partitions:
            tid = f"{op.key}.p{part.ordinal}"
            graph.add(Task(id=tid, fn=lambda p=part: p.rows))
            out.append(tid)
    else:
        idxs = [rel.schema.index_of(n) for n in want]
        for part in rel.partitions:
            tid = f"{op.key}.p{part.ordinal}"

            def load(p=part, ix=tuple(idxs)):
                return [tuple(r[i] for i in ix) for r in p.rows]

            graph.add(Task(id=tid, fn=load))
            out.append(tid)
    return out


def _filter_fn(pred: Comparison, names: list[str]):
    test = compile_pred(pred, names)

    def run(rows):
        return [r for r in rows if test(r)]

    return run


def _project_fn(meta: dict, names: list[str]):
    if "columns" in meta:
        idxs = tuple(names.index(n) for n in meta["columns"])

        def run(rows):
            return [tuple(r[i] for i in idxs) for r in rows]

        return run
    outs = [compile_expr(expr, names) for _, expr in meta["outputs"]]

    def run_exprs(rows):
        return [tuple(fn(r) for fn in outs) for r in rows]

    return run_exprs


def _compile_rowmap(graph: TaskGraph, key: str, child_refs: list[str], fn) -> list[str]:
    out = []
    for i, ref in enumerate(child_refs, start=1):
        tid = f"{key}.p{i}"
        graph.add(Task(id=tid, fn=fn, inputs=[ref]))
        out.append(tid)
    return out


def _compile_join(graph, op, refs, ep, relations, indexes, compiled) -> list[str]:
    left_key_col = op.meta["left_key"]
    right_key_col = op.meta["right_key"]
    left_refs = refs[op.children[0]]
    right_refs = refs[op.children[1]]
    left_names = ep.name_env[op.children[0]]["columns"]
    right_names = ep.name_env[op.children[1]]["columns"]
    li = left_names.index(left_key_col)
    ri = right_names.index(right_key_col)

    if op.meta["strategy"] == "indexed":
        index = indexes[(op.meta["right_table"], right_key_col)]
        return _compile_indexed_join(
            graph, op, left_refs, right_refs, li, ri, index, op.meta["preserve_order"], compiled
        )

    build_id = f"{op.key}.build"

    def build(*parts):
        table: dict = {}
        for rows in parts:
            for r in rows:
                table.setdefault(r[ri], []).append(r)
        return table

    graph.add(Task(id=build_id, fn=build, inputs=list(right_refs)))
    out = []
    for j, ref in enumerate(left_refs, start=1):
        tid = f"{op.key}.probe{j}"

        def probe_fn(rows, table):
            matched = []
            for l in rows:
                for r in table.get(l[li], ()):
                    matched.append(l + r)
            return matched

        graph.add(Task(id=tid, fn=probe_fn, inputs=[ref, build_id]))
        out.append(tid)
    return out


def _compile_indexed_join(
    graph, op, left_refs, right_refs, li, ri, index, preserve_order, compiled
) -> list[str]:
    """annotate -> per-ordinal select -> per-ordinal join (lazy A partition)."""
    stats = JoinStats()
    compiled.join_stats[op.key] = stats
    lock = compiled._lock
    n_parts = len(right_refs)

    ann_refs = []
    for j, ref in enumerate(left_refs, start=1):
        tid = f"{op.key}.ann{j}"
        if preserve_order:
            def annotate(rows, jj=j):
                return [
                    (probe(index, r[li]), jj, i, r) for i, r in enumerate(rows)
                ]
        else:
            def annotate(rows, jj=j):
                return [(probe(index, r[li]), r) for r in rows]
        graph.add(Task(id=tid, fn=annotate, inputs=[ref]))
        ann_refs.append(tid)

    out = []
    for ordinal in range(1, n_parts + 1):
        sel_id = f"{op.key}.sel{ordinal}"
        if preserve_order:
            def select(*parts, o=ordinal):
                return [e for rows in parts for e in rows if e[0] == o]
        else:
            def select(*parts, o=ordinal):
                return [e[1] for rows in parts for e in rows if e[0] == o]
        graph.add(Task(id=sel_id, fn=select, inputs=list(ann_refs)))

        join_id = f"{op.key}.join{ordinal}"
        a_ref = right_refs[ordinal - 1]

        def join(sel_rows, lazy_a, o=ordinal):
            if not sel_rows:
                with lock:
                    stats.pruned.add(o)
                return []
            with lock:
                stats.touched.add(o)
            a_rows = lazy_a.get()
            table: dict = {}
            for r in a_rows:
                table.setdefault(r[ri], []).append(r)
            matched = []
            if preserve_order:
                for _, jj, ii, lrow in sel_rows:
                    for arow in table.get(lrow[li], ()):
                        matched.append((jj, ii, lrow + arow))
            else:
                for lrow in sel_rows:
                    for arow in table.get(lrow[li], ()):
                        matched.append(lrow + arow)
            return matched

        graph.add(Task(id=join_id, fn=join, inputs=[sel_id, a_ref], lazy=frozenset([a_ref])))
        out.append(join_id)

    if not preserve_order:
        return out

    merge_id = f"{op.key}.merge"

    def merge(*parts):
        entries = [e for rows in parts for e in rows]
        entries.sort(key=lambda e: (e[0], e[1]))
        return [row for _, _, row in entries]

    graph.add(Task(id=merge_id, fn=merge, inputs=list(out)))
    return [merge_id]


def _compile_aggregate(graph, op, child_refs, names, strategy, threads) -> list[str]:
    gidx = tuple(names.index(c) for c in op.meta["group_cols"])
    outputs = op.meta["outputs"]
    agg_specs = []
    for entry in outputs:
        if entry[0] == "agg":
            _, name, call = entry
            value_fn = None if call.arg is None else compile_expr(call.arg, names)
            agg_specs.append((name, aggregation.agg_function(call.func), value_fn))
    group_exprs = [
        (name, compile_expr(expr, names))
        for kind, name, expr in outputs
        if kind == "group"
    ]

    tid = f"{op.key}.agg"

    def run(*parts):
        rows = [r for p in parts for r in p]
        if not rows:
            return []
        reps: list = []
        ids: list = []
        seen: dict = {}
        if gidx:
            for r in rows:
                gk = tuple(r[i] for i in gidx)
                gid = seen.get(gk)
                if gid is None:
                    gid = len(reps)
                    seen[gk] = gid
                    reps.append(r)
                ids.append(gid)
        else:
            reps.append(rows[0])
            ids = [0] * len(rows)
        agg_results = {}
        for name, f, value_fn in agg_specs:
            vals = ids if value_fn is None else [float(value_fn(r)) for r in rows]
            agg_results[name] = aggregation.aggregate((ids, vals), f, strategy, threads)
        out_rows = []
        for gid in range(len(reps)):
            rep = reps[gid]
            row = []
            for entry in outputs:
                if entry[0] == "agg":
                    row.append(agg_results[entry[1]][gid])
                else:
                    row.append(group_exprs_by_name[entry[1]](rep))
            out_rows.append(tuple(row))
        return out_rows

    group_exprs_by_name = dict(group_exprs)
    graph.add(Task(id=tid, fn=run, inputs=list(child_refs)))
    return [tid]


def _compile_sort(graph, op, child_refs, names) -> list[str]:
    items = op.meta["items"]
    idx_items = [(names.index(n), desc) for n, desc in items]
    tid = f"{op.key}.sort"

    def run(*parts):
        rows = [r for p in parts for r in p]
        rows.sort()  # full-row tiebreak makes the order a multiset function
        for i, desc in reversed(idx_items):
            rows.sort(key=operator.itemgetter(i), reverse=desc)
        return rows

    graph.add(Task(id=tid, fn=run, inputs=list(child_refs)))
    return [tid]


def _compile_head(graph, op, child_refs) -> list[str]:
    n = op.meta["n"]
    tid = f"{op.key}.head"

    def run(*parts):
        out = []
        for rows in parts:
            for r in rows:
                if len(out) == n:
                    return out
                out.append(r)
        return out

    graph.add(Task(id=tid, fn=run, inputs=list(child_refs)))
    return [tid]


def _compile_udf(graph, op, child_refs, names, registry) -> list[str]:
    from ..udf import frames_for_call

    udf_name = op.meta["name"]
    arg_cols = list(op.meta["arg_cols"])
    tid = f"{op.key}.udf"

    def run(*parts):
        rows = [r for p in parts for r in p]
        frames = frames_for_call(registry, udf_name, arg_cols, names, rows)
        result = registry.invoke(udf_name, frames)
        return result.rows, result.layout

    graph.add(Task(id=tid, fn=run, inputs=list(child_refs)))
    return [tid]
