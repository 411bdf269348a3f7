"""Syntax tree for the supported SQL subset.

All nodes are frozen dataclasses so parsed queries compare structurally,
which the canonical-text round-trip tests rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

AGGREGATE_FUNCS = ("sum", "count", "avg", "min", "max")

COMPARATORS = ("=", "<", "<=", ">", ">=", "<>")


@dataclass(frozen=True)
class ColumnRef:
    name: str


@dataclass(frozen=True)
class Literal:
    value: Union[int, float, str]
    # kind distinguishes '5' the number from '5' the quoted string
    kind: str  # "number" | "string"


@dataclass(frozen=True)
class BinaryOp:
    op: str  # + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class AggCall:
    func: str  # one of AGGREGATE_FUNCS
    arg: "Expr | None"  # None means count(*)


@dataclass(frozen=True)
class UdfCall:
    name: str
    args: tuple[ColumnRef, ...]


Expr = Union[ColumnRef, Literal, BinaryOp, AggCall, UdfCall]


@dataclass(frozen=True)
class SelectItem:
    expr: Expr
    alias: str | None = None


@dataclass(frozen=True)
class Comparison:
    left: Union[ColumnRef, Literal]
    op: str
    right: Union[ColumnRef, Literal]


@dataclass(frozen=True)
class OrderItem:
    expr: Expr  # column ref or select-list alias
    desc: bool = False


@dataclass(frozen=True)
class ParsedQuery:
    select_items: tuple[SelectItem, ...]
    from_tables: tuple[str, ...]
    where: tuple[Comparison, ...] = ()
    group_by: tuple[ColumnRef, ...] = ()
    order_by: tuple[OrderItem, ...] = ()
    limit: int | None = None


@dataclass(frozen=True)
class QueryMetadata:
    table_names: frozenset[str]
    column_names: frozenset[str]
    udf_names: frozenset[str]


@dataclass
class BoundQuery:
    """A parsed query with every name resolved against catalog and registry."""

    parsed: ParsedQuery
    table_schemas: dict  # table name -> Schema
    column_table: dict  # column name -> owning table name
    udf_signatures: dict = field(default_factory=dict)  # udf -> arg column counts
    output_names: list = field(default_factory=list)  # select-list output names
    aliases: dict = field(default_factory=dict)  # alias -> select item index
    typed_where: list = field(default_factory=list)  # predicates with typed literals


def walk_expr(expr: Expr):
    """Yield expr and all sub-expressions."""
    yield expr
    if isinstance(expr, BinaryOp):
        yield from walk_expr(expr.left)
        yield from walk_expr(expr.right)
    elif isinstance(expr, AggCall) and expr.arg is not None:
        yield from walk_expr(expr.arg)
    elif isinstance(expr, UdfCall):
        for a in expr.args:
            yield from walk_expr(a)


def expr_columns(expr: Expr) -> list[str]:
    return [e.name for e in walk_expr(expr) if isinstance(e, ColumnRef)]


def has_aggregate(expr: Expr) -> bool:
    return any(isinstance(e, AggCall) for e in walk_expr(expr))


def has_udf(expr: Expr) -> bool:
    return any(isinstance(e, UdfCall) for e in walk_expr(expr))
