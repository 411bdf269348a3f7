"""Physical plan: ordered groups of keyed operator tuples.

A group is a maximal chain of single-input operators over one upstream
relation; every multi-input operator (join) starts a new group. Keys are
assigned in lowering order (left join input first), so iterating groups in
order and tuples in order within a group is a valid dependency order.

Join strategy is fixed here: when the join's right input is a bare scan of
a table that is sorted and index-eligible on the join key, the join is
marked indexed (partition-pruned); otherwise it is a partitioned hash join.
A join is marked order-preserving when something order-sensitive (head or
a UDF) consumes its rows before any sort or aggregation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..frontend.ast import ColumnRef, Comparison, Literal
from ..relation import DATE, FLOAT64, INT64, STRING, days_to_date
from . import logical as L


@dataclass
class PhysOp:
    key: str
    op_type: str  # scan filter project join aggregate sort limit udf_apply
    meta: dict


@dataclass
class OperatorGroup:
    ops: list[PhysOp] = field(default_factory=list)


@dataclass
class PhysicalPlan:
    groups: list[OperatorGroup] = field(default_factory=list)
    layouts: dict = field(default_factory=dict)  # key -> [(column, type)]

    def all_ops(self) -> list[PhysOp]:
        return [op for g in self.groups for op in g.ops]


class _Lowering:
    def __init__(self, schemas: dict, sorted_tables: dict):
        self.schemas = schemas  # table -> Schema
        self.sorted_tables = sorted_tables  # table -> sort column (index-eligible)
        self.groups: list[OperatorGroup] = []
        self.counter = 0
        self.layouts: dict[str, list] = {}  # key -> [(name, type)]

    def new_key(self) -> str:
        self.counter += 1
        return f"k{self.counter}"

    def emit(self, op_type: str, meta: dict, children: list[str], new_group: bool) -> str:
        key = self.new_key()
        meta = dict(meta)
        meta["children"] = children
        op = PhysOp(key=key, op_type=op_type, meta=meta)
        if new_group or not self.groups:
            self.groups.append(OperatorGroup(ops=[op]))
        else:
            self.groups[-1].ops.append(op)
        return key

    def layout_of(self, key: str) -> list:
        return self.layouts[key]

    # -- node lowering --

    def lower(self, node, order_sensitive: bool) -> str:
        if isinstance(node, L.Scan):
            schema = self.schemas[node.table]
            layout = [(n, schema.type_of(n)) for n in node.columns]
            key = self.emit(
                "scan",
                {"table": node.table, "columns": list(node.columns),
                 "types": [t for _, t in layout]},
                children=[],
                new_group=True,
            )
            self.layouts[key] = layout
            return key
        if isinstance(node, L.Filter):
            child = self.lower(node.child, order_sensitive)
            meta = _filter_meta(node.pred, self.layouts[child])
            key = self.emit("filter", meta, children=[child], new_group=False)
            self.layouts[key] = self.layouts[child]
            return key
        if isinstance(node, L.Project):
            child = self.lower(node.child, order_sensitive)
            child_layout = dict(self.layouts[child])
            key = self.emit(
                "project", {"columns": list(node.columns)}, children=[child], new_group=False
            )
            self.layouts[key] = [(n, child_layout[n]) for n in node.columns]
            return key
        if isinstance(node, L.Compute):
            child = self.lower(node.child, order_sensitive)
            layout = [
                (name, expr_type(expr, dict(self.layouts[child])))
                for name, expr in node.outputs
            ]
            key = self.emit(
                "project",
                {"outputs": [(name, expr) for name, expr in node.outputs]},
                children=[child],
                new_group=False,
            )
            self.layouts[key] = layout
            return key
        if isinstance(node, L.Join):
            left = self.lower(node.left, order_sensitive)
            right = self.lower(node.right, order_sensitive)
            strategy = "hash"
            if node.right_table and self.sorted_tables.get(node.right_table) == node.right_col:
                strategy = "indexed"
            meta = {
                "left_key": node.left_col,
                "right_key": node.right_col,
                "strategy": strategy,
                "right_table": node.right_table,
                "preserve_order": order_sensitive,
            }
            key = self.emit("join", meta, children=[left, right], new_group=True)
            self.layouts[key] = self.layouts[left] + self.layouts[right]
            return key
        if isinstance(node, L.Aggregate):
            child = self.lower(node.child, False)  # multiset consumer

            child_types = dict(self.layouts[child])
            outputs, layout = [], []
            for entry in node.outputs:
                if entry[0] == "agg":
                    _, name, call = entry
                    outputs.append(("agg", name, call))
                    layout.append((name, INT64 if call.func == "count" else FLOAT64))
                else:
                    _, name, expr = entry
                    outputs.append(("group", name, expr))
                    layout.append((name, expr_type(expr, child_types)))
            key = self.emit(
                "aggregate",
                {"group_cols": list(node.group_cols), "outputs": outputs},
                children=[child],
                new_group=False,
            )
            self.layouts[key] = layout
            return key
        if isinstance(node, L.Sort):
            # sort output order is self-defined (full-row tiebreak), so the
            # input may arrive in any order
            child = self.lower(node.child, False)
            key = self.emit(
                "sort", {"items": list(node.items)}, children=[child], new_group=False
            )
            self.layouts[key] = self.layouts[child]
            return key
        if isinstance(node, L.Limit):
            child = self.lower(node.child, True)  # which rows survive depends on order
            key = self.emit("limit", {"n": node.n}, children=[child], new_group=False)
            self.layouts[key] = self.layouts[child]
            return key
        if isinstance(node, L.UdfApply):
            child = self.lower(node.child, True)  # frame row order is observable
            key = self.emit(
                "udf_apply",
                {"name": node.name, "arg_cols": list(node.arg_cols)},
                children=[child],
                new_group=False,
            )
            self.layouts[key] = [("result", None)]  # shape known only at runtime
            return key
        raise TypeError(f"unknown logical node {node!r}")


def to_physical(lp, schemas: dict, sorted_tables: dict | None = None) -> PhysicalPlan:
    """Lower the logical tree into ordered dependent operator groups."""
    lowering = _Lowering(schemas, sorted_tables or {})
    lowering.lower(lp, False)
    plan = PhysicalPlan(groups=lowering.groups)
    plan.layouts = lowering.layouts
    return plan


def _filter_meta(pred: Comparison, layout: list) -> dict:
    types = dict(layout)
    meta: dict = {"comparator": pred.op}
    if isinstance(pred.left, ColumnRef) and isinstance(pred.right, ColumnRef):
        meta["column"] = pred.left.name
        meta["other_column"] = pred.right.name
    elif isinstance(pred.left, ColumnRef):
        meta["column"] = pred.left.name
        meta["literal"] = pred.right.value
        meta["literal_display"] = _display(pred.right, types.get(pred.left.name))
    elif isinstance(pred.right, ColumnRef):
        meta["column"] = pred.right.name
        meta["literal"] = pred.left.value
        meta["literal_display"] = _display(pred.left, types.get(pred.right.name))
        meta["flipped"] = True
    else:
        meta["left_literal"] = pred.left.value
        meta["right_literal"] = pred.right.value
    meta["pred"] = pred
    return meta


def _display(lit: Literal, col_type) -> str:
    if col_type == DATE and isinstance(lit.value, int):
        return days_to_date(lit.value)
    if lit.kind == "string":
        return f"'{lit.value}'"
    return repr(lit.value)


def expr_type(expr, types: dict) -> str:
    """Static result type of a select expression given input column types."""
    from ..frontend.ast import AggCall, BinaryOp

    if isinstance(expr, ColumnRef):
        return types[expr.name]
    if isinstance(expr, Literal):
        if expr.kind == "string":
            return STRING
        return INT64 if isinstance(expr.value, int) else FLOAT64
    if isinstance(expr, BinaryOp):
        lt = expr_type(expr.left, types)
        rt = expr_type(expr.right, types)
        if expr.op == "/":
            return FLOAT64
        if lt == INT64 and rt == INT64:
            return INT64
        return FLOAT64
    if isinstance(expr, AggCall):
        return INT64 if expr.func == "count" else FLOAT64
    raise TypeError(f"cannot type expression {expr!r}")
