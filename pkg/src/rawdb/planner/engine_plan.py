"""Conversion of a physical plan into the executable engine plan.

Two passes. The first iterates the plan's groups in order and each group's
keyed tuples in order, turning every physical operator into exactly one
engine operator (op tag conversion, metadata extraction, key carried over)
while maintaining name_env, the dynamic map of live relation names and
column layouts. The second pass walks the built list and attaches, for each
operator child, that child's relation descriptor as table_info.

Engine op tags: read_table, filters, select_columns, merge_join,
groupby_agg, sort_values, head, apply_udf.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import UnknownOperatorTypeError
from ..frontend.parser import render_expr
from .physical import PhysicalPlan

OP_CONVERSION = {
    "scan": "read_table",
    "filter": "filters",
    "project": "select_columns",
    "join": "merge_join",
    "aggregate": "groupby_agg",
    "sort": "sort_values",
    "limit": "head",
    "udf_apply": "apply_udf",
}


@dataclass
class EngineOperator:
    op: str
    meta: dict
    key: str
    children: list[str] = field(default_factory=list)
    table_info: dict = field(default_factory=dict)  # child key -> descriptor


@dataclass
class EnginePlan:
    ops: list[EngineOperator] = field(default_factory=list)
    name_env: dict = field(default_factory=dict)  # key -> {name, columns, types}

    def op_by_key(self, key: str) -> EngineOperator:
        for op in self.ops:
            if op.key == key:
                return op
        raise KeyError(key)


def convert_to_engine_plan(plan: PhysicalPlan) -> EnginePlan:
    """One engine operator per physical operator, in group/tuple order."""
    ops: list[EngineOperator] = []
    name_env: dict = {}
    for group in plan.groups:
        for phys in group.ops:
            tag = OP_CONVERSION.get(phys.op_type)
            if tag is None:
                raise UnknownOperatorTypeError(phys.op_type)
            meta = {k: v for k, v in phys.meta.items() if k != "children"}
            children = list(phys.meta.get("children", []))
            op = EngineOperator(op=tag, meta=meta, key=phys.key, children=children)
            ops.append(op)
            name_env[phys.key] = _relation_info(op, name_env, plan)
    for op in ops:
        for child in op.children:
            op.table_info[child] = name_env[child]
    return EnginePlan(ops=ops, name_env=name_env)


def _relation_info(op: EngineOperator, name_env: dict, plan: PhysicalPlan) -> dict:
    layout = plan.layouts.get(op.key, [])
    columns = [n for n, _ in layout]
    types = [t for _, t in layout]
    if op.op == "read_table":
        name = op.meta["table"]
    elif op.children:
        base = name_env[op.children[0]]["name"]
        name = base if op.op in ("filters", "select_columns", "head") else f"{op.op}_{op.key}"
    else:
        name = op.key
    return {"name": name, "columns": columns, "types": types}


# --- rendering ---


def _describe(op: EngineOperator) -> str:
    meta = op.meta
    if op.op == "read_table":
        return f"read_table({meta['table']})"
    if op.op == "filters":
        if "other_column" in meta:
            return f"filters({meta['column']} {meta['comparator']} {meta['other_column']})"
        if "literal_display" in meta:
            display = meta["literal_display"]
            if display.startswith("'") and display.endswith("'"):
                display = display[1:-1]
            return f"filters({meta['column']} {meta['comparator']} {display})"
        return f"filters({meta.get('left_literal')} {meta['comparator']} {meta.get('right_literal')})"
    if op.op == "select_columns":
        if "columns" in meta:
            return f"select_columns([{', '.join(meta['columns'])}])"
        rendered = [
            r if r == n else f"{r} AS {n}"
            for n, e in meta["outputs"]
            for r in (render_expr(e),)
        ]
        return f"select_columns([{', '.join(rendered)}])"
    if op.op == "merge_join":
        return (
            f"merge_join({meta['left_key']} = {meta['right_key']}, "
            f"strategy={meta['strategy']})"
        )
    if op.op == "groupby_agg":
        parts = []
        for entry in meta["outputs"]:
            if entry[0] == "agg":
                _, name, call = entry
                arg = "*" if call.arg is None else render_expr(call.arg)
                parts.append(f"{call.func}({arg}) AS {name}")
        by = ", ".join(meta["group_cols"]) or "-"
        return f"groupby_agg(by=[{by}], aggs=[{', '.join(parts)}])"
    if op.op == "sort_values":
        rendered = [f"{name} {'desc' if d else 'asc'}" for name, d in meta["items"]]
        return f"sort_values({', '.join(rendered)})"
    if op.op == "head":
        return f"head({meta['n']})"
    if op.op == "apply_udf":
        return f"apply_udf({meta['name']}({', '.join(meta['arg_cols'])}))"
    return op.op


def render_explain(ep: EnginePlan) -> str:
    """Deterministic indented tree; parent-child edges come from children keys."""
    if not ep.ops:
        return "(empty plan)"
    by_key = {op.key: op for op in ep.ops}
    consumed = {c for op in ep.ops for c in op.children}
    roots = [op for op in ep.ops if op.key not in consumed]
    lines: list[str] = []

    def walk(op: EngineOperator, prefix: str, tail: bool, top: bool):
        if top:
            lines.append(_describe(op))
            child_prefix = ""
        else:
            branch = "└─ " if tail else "├─ "
            lines.append(prefix + branch + _describe(op))
            child_prefix = prefix + ("   " if tail else "│  ")
        kids = [by_key[c] for c in op.children]
        for i, kid in enumerate(kids):
            walk(kid, child_prefix, tail=(i == len(kids) - 1), top=False)

    for root in reversed(roots):  # the final operator renders first
        walk(root, "", tail=True, top=True)
    return "\n".join(lines)


def serialize_plan(ep: EnginePlan) -> str:
    """Line-oriented structured form for golden-file comparisons."""
    if not ep.ops:
        return "(empty plan)"
    lines = []
    for op in ep.ops:
        children = ",".join(op.children) or "-"
        lines.append(f"{op.key}|{op.op}|children={children}|{_describe(op)}")
    return "\n".join(lines)
