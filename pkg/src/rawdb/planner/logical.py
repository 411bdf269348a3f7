"""Lowering a bound query to a logical operator tree.

The tree has scan leaves and a single root. Rewrites applied here, and only
these: single-table predicates are pushed below joins onto their table's
branch, and scans read just the columns the rest of the plan needs (with an
explicit narrowing projection after a filter whose columns die there).

Join order is deterministic: starting from the first FROM table, repeatedly
attach the first FROM-order table connected to the joined set by an equality
predicate (first such predicate in WHERE order is the join key; any others
become filters right after that join). Queries whose tables cannot all be
connected this way are rejected; there is no cross product.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import UnsupportedQueryError
from ..frontend.ast import (
    AggCall,
    BoundQuery,
    ColumnRef,
    Comparison,
    Expr,
    SelectItem,
    UdfCall,
    expr_columns,
    has_aggregate,
)


@dataclass
class Scan:
    table: str
    columns: list[str]  # pruned read set, schema order


@dataclass
class Filter:
    child: "LogicalNode"
    pred: Comparison  # literals already typed by the binder


@dataclass
class Project:
    child: "LogicalNode"
    columns: list[str]


@dataclass
class Compute:
    """Materialize the select list (possibly arithmetic) as output columns."""

    child: "LogicalNode"
    outputs: list[tuple[str, Expr]]


@dataclass
class Join:
    left: "LogicalNode"
    right: "LogicalNode"
    left_col: str
    right_col: str
    right_table: str  # base table name when right is a bare scan, else ""


@dataclass
class Aggregate:
    child: "LogicalNode"
    group_cols: list[str]
    # select-list order: ("group", column) or ("agg", name, AggCall)
    outputs: list[tuple]


@dataclass
class Sort:
    child: "LogicalNode"
    items: list[tuple[str, bool]]  # (output column name, desc)


@dataclass
class Limit:
    child: "LogicalNode"
    n: int


@dataclass
class UdfApply:
    child: "LogicalNode"
    name: str
    arg_cols: list[str]


LogicalNode = object


@dataclass
class _PredicateSplit:
    single: dict = field(default_factory=dict)  # table -> [Comparison]
    join_edges: list = field(default_factory=list)  # (tables frozenset, Comparison)
    residual: list = field(default_factory=list)  # cross-table non-equi


def _split_predicates(bound: BoundQuery) -> _PredicateSplit:
    split = _PredicateSplit()
    for cmp_ in bound.typed_where:
        cols = [s for s in (cmp_.left, cmp_.right) if isinstance(s, ColumnRef)]
        tables = {bound.column_table[c.name] for c in cols}
        if len(tables) <= 1:
            table = tables.pop() if tables else bound.parsed.from_tables[0]
            split.single.setdefault(table, []).append(cmp_)
        elif cmp_.op == "=":
            split.join_edges.append((frozenset(tables), cmp_))
        else:
            split.residual.append((frozenset(tables), cmp_))
    return split


def _needed_columns(bound: BoundQuery, split: _PredicateSplit) -> dict[str, set]:
    """Columns each table must expose above its filters."""
    needed: dict[str, set] = {t: set() for t in bound.parsed.from_tables}

    def note(col: str):
        needed[bound.column_table[col]].add(col)

    for item in bound.parsed.select_items:
        for c in expr_columns(item.expr):
            note(c)
    for c in bound.parsed.group_by:
        note(c.name)
    for o in bound.parsed.order_by:
        for c in expr_columns(o.expr):
            if c not in bound.aliases:
                note(c)
    for _, cmp_ in split.join_edges + split.residual:
        for side in (cmp_.left, cmp_.right):
            if isinstance(side, ColumnRef):
                note(side.name)
    return needed


def _table_branch(bound: BoundQuery, table: str, split: _PredicateSplit, needed: set) -> LogicalNode:
    schema = bound.table_schemas[table]
    filter_cols = set()
    for cmp_ in split.single.get(table, []):
        for side in (cmp_.left, cmp_.right):
            if isinstance(side, ColumnRef):
                filter_cols.add(side.name)
    read_cols = [n for n in schema.names if n in (needed | filter_cols)]
    if not read_cols:
        # a table used only for its presence (no column referenced) still
        # needs one column to carry rows through
        read_cols = [schema.names[0]]
    node: LogicalNode = Scan(table=table, columns=read_cols)
    for cmp_ in split.single.get(table, []):
        node = Filter(child=node, pred=cmp_)
    dead = filter_cols - needed
    if split.single.get(table) and dead:
        keep = [n for n in read_cols if n not in dead]
        if not keep:
            keep = read_cols[:1]
        node = Project(child=node, columns=keep)
    return node


def _join_chain(bound: BoundQuery, branches: dict, split: _PredicateSplit):
    """Left-deep join of all FROM tables; returns (root, live column set)."""
    tables = list(bound.parsed.from_tables)
    joined = {tables[0]}
    node = branches[tables[0]]
    edges = list(split.join_edges)
    residual = list(split.residual)
    remaining = tables[1:]

    def table_of(side) -> str:
        return bound.column_table[side.name]

    while remaining:
        pick = None
        for cand in remaining:
            for i, (tset, cmp_) in enumerate(edges):
                if cand in tset and (tset - {cand}) <= joined:
                    pick = (cand, i, cmp_)
                    break
            if pick:
                break
        if pick is None:
            raise UnsupportedQueryError(
                f"tables {remaining} are not connected to the join tree by any "
                "equality predicate"
            )
        cand, edge_i, cmp_ = pick
        edges.pop(edge_i)
        if table_of(cmp_.left) == cand:
            right_col, left_col = cmp_.left.name, cmp_.right.name
        else:
            right_col, left_col = cmp_.right.name, cmp_.left.name
        right_branch = branches[cand]
        node = Join(
            left=node,
            right=right_branch,
            left_col=left_col,
            right_col=right_col,
            right_table=cand if isinstance(right_branch, Scan) else "",
        )
        joined.add(cand)
        remaining.remove(cand)
        # predicates that became evaluable on the joined relation
        for tset, extra in list(edges):
            if tset <= joined:
                node = Filter(child=node, pred=extra)
                edges.remove((tset, extra))
        for tset, extra in list(residual):
            if tset <= joined:
                node = Filter(child=node, pred=extra)
                residual.remove((tset, extra))
    return node


def build_logical_plan(bound: BoundQuery) -> LogicalNode:
    """Scan leaves, one root; selections pushed to their table's branch."""
    parsed = bound.parsed
    split = _split_predicates(bound)
    needed = _needed_columns(bound, split)
    branches = {
        t: _table_branch(bound, t, split, needed[t]) for t in parsed.from_tables
    }
    node = _join_chain(bound, branches, split) if len(parsed.from_tables) > 1 else branches[parsed.from_tables[0]]

    udf_items = [it for it in parsed.select_items if isinstance(it.expr, UdfCall)]
    if udf_items:
        call = udf_items[0].expr
        arg_cols = [a.name for a in call.args]
        node = Project(child=node, columns=arg_cols)
        if parsed.order_by:
            node = Sort(child=node, items=_sort_items(bound))
        if parsed.limit is not None:
            node = Limit(child=node, n=parsed.limit)
        return UdfApply(child=node, name=call.name, arg_cols=arg_cols)

    if parsed.group_by or any(has_aggregate(it.expr) for it in parsed.select_items):
        outputs = []
        for item, out_name in zip(parsed.select_items, bound.output_names):
            if isinstance(item.expr, AggCall):
                outputs.append(("agg", out_name, item.expr))
            elif has_aggregate(item.expr):
                raise UnsupportedQueryError(
                    "aggregates may not be nested inside arithmetic in the select list"
                )
            else:
                outputs.append(("group", out_name, item.expr))
        node = Aggregate(
            child=node,
            group_cols=[c.name for c in parsed.group_by],
            outputs=outputs,
        )
    else:
        outputs = [
            (name, item.expr)
            for item, name in zip(parsed.select_items, bound.output_names)
        ]
        node = Compute(child=node, outputs=outputs)

    if parsed.order_by:
        node = Sort(child=node, items=_sort_items(bound))
    if parsed.limit is not None:
        node = Limit(child=node, n=parsed.limit)
    return node


def _sort_items(bound: BoundQuery) -> list[tuple[str, bool]]:
    items = []
    for o in bound.parsed.order_by:
        if not isinstance(o.expr, ColumnRef):
            raise UnsupportedQueryError(
                "ORDER BY supports select-list aliases and output columns only"
            )
        name = o.expr.name
        if name not in bound.aliases and name not in bound.output_names:
            raise UnsupportedQueryError(
                f"ORDER BY column {name!r} is not in the select list"
            )
        items.append((name, o.desc))
    return items
