"""Naive single-threaded query evaluation, the oracle for the engine.

Materializes whole tables as row lists and evaluates the bound query with
the simplest code that is correct: per-table predicate filters, a left-deep
chain of dictionary-lookup equi-joins in the same deterministic table order
the planner uses, plain-dict aggregation, a comparison-based sort, limit,
then the UDF. No partitions, no tasks, no learned index, no aggregation
strategies; it shares only the frontend AST with the engine.

Join output order is probe-major (accumulated rows in order, matches in
build-side row order), which defines the canonical row order that the
engine must reproduce wherever order is observable.
"""

from __future__ import annotations

import functools

from .errors import UnsupportedQueryError
from .frontend.ast import (
    AggCall,
    BinaryOp,
    BoundQuery,
    ColumnRef,
    Literal,
    UdfCall,
    has_aggregate,
)
from .planner.physical import expr_type
from .udf import frames_for_call


def _eval(expr, names, row):
    if isinstance(expr, ColumnRef):
        return row[names.index(expr.name)]
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, BinaryOp):
        a = _eval(expr.left, names, row)
        b = _eval(expr.right, names, row)
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        return a / b
    raise TypeError(f"not a row expression: {expr!r}")


def _test(cmp_, names, row) -> bool:
    a = _eval(cmp_.left, names, row)
    b = _eval(cmp_.right, names, row)
    return {
        "=": a == b,
        "<": a < b,
        "<=": a <= b,
        ">": a > b,
        ">=": a >= b,
        "<>": a != b,
    }[cmp_.op]


def reference_evaluate(bound: BoundQuery, tables: dict) -> tuple[list[str], list[str], list[tuple]]:
    """Evaluate bound against {table: (schema, rows)}.

    Returns (column names, column types, rows). UDF queries need the same
    registry the engine uses (pass it via bound.udf_registry attribute set
    by the caller) since the callable itself is part of the query.
    """
    parsed = bound.parsed

    # per-table predicate split
    single: dict[str, list] = {}
    cross: list = []
    for cmp_ in bound.typed_where:
        cols = [s for s in (cmp_.left, cmp_.right) if isinstance(s, ColumnRef)]
        owner = {bound.column_table[c.name] for c in cols}
        if len(owner) <= 1:
            single.setdefault(owner.pop() if owner else parsed.from_tables[0], []).append(cmp_)
        else:
            cross.append(cmp_)

    filtered: dict[str, tuple[list[str], list[str], list]] = {}
    for t in parsed.from_tables:
        schema, rows = tables[t]
        names = schema.names
        for cmp_ in single.get(t, []):
            rows = [r for r in rows if _test(cmp_, names, r)]
        filtered[t] = (list(names), [schema.type_of(n) for n in names], rows)

    names, col_types, rows = _join_all(bound, filtered, cross)

    udf_items = [it for it in parsed.select_items if isinstance(it.expr, UdfCall)]
    if udf_items:
        return _apply_udf(bound, udf_items[0].expr, names, rows)

    if parsed.group_by or any(has_aggregate(it.expr) for it in parsed.select_items):
        out_names, out_types, rows = _aggregate(bound, names, col_types, rows)
    else:
        out_names = list(bound.output_names)
        types = dict(zip(names, col_types))
        out_types = [
            expr_type(item.expr, types) for item in parsed.select_items
        ]
        rows = [
            tuple(_eval(item.expr, names, r) for item in parsed.select_items)
            for r in rows
        ]

    if parsed.order_by:
        rows = _sorted_rows(bound, out_names, rows)
    if parsed.limit is not None:
        rows = rows[: parsed.limit]
    return out_names, out_types, rows


def _join_all(bound: BoundQuery, filtered: dict, cross: list):
    parsed = bound.parsed
    order = list(parsed.from_tables)
    names, col_types, rows = filtered[order[0]]
    joined = {order[0]}
    remaining = order[1:]
    edges = [c for c in cross if c.op == "="]
    others = [c for c in cross if c.op != "="]
    pending = list(cross)

    def table_of(side):
        return bound.column_table[side.name]

    while remaining:
        pick = None
        for cand in remaining:
            for cmp_ in edges:
                tset = {table_of(cmp_.left), table_of(cmp_.right)}
                if cand in tset and (tset - {cand}) <= joined:
                    pick = (cand, cmp_)
                    break
            if pick:
                break
        if pick is None:
            raise UnsupportedQueryError(
                f"tables {remaining} are not connected to the join tree by any "
                "equality predicate"
            )
        cand, cmp_ = pick
        edges.remove(cmp_)
        pending.remove(cmp_)
        if table_of(cmp_.left) == cand:
            right_col, left_col = cmp_.left.name, cmp_.right.name
        else:
            right_col, left_col = cmp_.right.name, cmp_.left.name
        rnames, rtypes, rrows = filtered[cand]
        ri = rnames.index(right_col)
        lookup: dict = {}
        for r in rrows:
            lookup.setdefault(r[ri], []).append(r)
        li = names.index(left_col)
        rows = [l + r for l in rows for r in lookup.get(l[li], ())]
        names = names + rnames
        col_types = col_types + rtypes
        joined.add(cand)
        remaining.remove(cand)
        for cmp2 in list(pending):
            tset = {table_of(cmp2.left), table_of(cmp2.right)}
            if tset <= joined:
                rows = [r for r in rows if _test(cmp2, names, r)]
                pending.remove(cmp2)
                if cmp2 in edges:
                    edges.remove(cmp2)
    return names, col_types, rows


def _aggregate(bound: BoundQuery, names: list[str], col_types: list[str], rows: list):
    parsed = bound.parsed
    gcols = [c.name for c in parsed.group_by]
    gidx = [names.index(c) for c in gcols]
    groups: dict = {}
    order: list = []
    for r in rows:
        gk = tuple(r[i] for i in gidx)
        if gk not in groups:
            groups[gk] = []
            order.append(gk)
        groups[gk].append(r)

    out_names = list(bound.output_names)
    type_map = dict(zip(names, col_types))
    out_types = [expr_type(item.expr, type_map) for item in parsed.select_items]

    def agg_value(call: AggCall, grows):
        if call.func == "count":
            return len(grows)
        vals = [float(_eval(call.arg, names, r)) for r in grows]
        if call.func == "sum":
            return _accumulate(vals)
        if call.func == "avg":
            return _accumulate(vals) / len(vals)
        if call.func == "min":
            return min(vals)
        if call.func == "max":
            return max(vals)
        raise UnsupportedQueryError(f"aggregate {call.func}")

    out_rows = []
    for gk in order:
        grows = groups[gk]
        row = []
        for item in parsed.select_items:
            if isinstance(item.expr, AggCall):
                row.append(agg_value(item.expr, grows))
            else:
                row.append(_eval(item.expr, names, grows[0]))
        out_rows.append(tuple(row))
    return out_names, out_types, out_rows


def _accumulate(vals: list[float]) -> float:
    total = 0.0
    for v in vals:
        total += v
    return total


def _sorted_rows(bound: BoundQuery, out_names: list[str], rows: list):
    items = []
    for o in bound.parsed.order_by:
        if not isinstance(o.expr, ColumnRef):
            raise UnsupportedQueryError("ORDER BY supports aliases and output columns only")
        if o.expr.name not in out_names:
            raise UnsupportedQueryError(f"ORDER BY column {o.expr.name!r} is not in the select list")
        items.append((out_names.index(o.expr.name), o.desc))

    def compare(a, b):
        for i, desc in items:
            if a[i] == b[i]:
                continue
            less = a[i] < b[i]
            if desc:
                return 1 if less else -1
            return -1 if less else 1
        # full-row tiebreak keeps the order a pure function of the multiset
        if a == b:
            return 0
        return -1 if a < b else 1

    return sorted(rows, key=functools.cmp_to_key(compare))


def _apply_udf(bound: BoundQuery, call: UdfCall, names: list[str], rows: list):
    parsed = bound.parsed
    arg_cols = [a.name for a in call.args]
    idxs = [names.index(c) for c in arg_cols]
    projected = [tuple(r[i] for i in idxs) for r in rows]
    if parsed.order_by:
        raise UnsupportedQueryError("ORDER BY with a UDF select is not supported here")
    if parsed.limit is not None:
        projected = projected[: parsed.limit]
    registry = getattr(bound, "udf_registry", None)
    if registry is None:
        raise UnsupportedQueryError("UDF query needs a registry for reference evaluation")
    frames = frames_for_call(registry, call.name, arg_cols, arg_cols, projected)
    result = registry.invoke(call.name, frames)
    out_names = [n for n, _ in result.layout]
    out_types = [t for _, t in result.layout]
    return out_names, out_types, result.rows
