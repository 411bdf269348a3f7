"""Name resolution: tables against the catalog, columns against schemas,
UDFs against the registry.

Column references are unqualified; a name must resolve to exactly one of
the query's FROM tables (TPC-H style prefixes make this unambiguous in
practice). Literals compared against a column are coerced to that column's
type here, so later stages never see untyped text.
"""

from __future__ import annotations

from ..errors import (
    AmbiguousColumnError,
    TypeMismatchError,
    UdfArityMismatchError,
    UnknownColumnError,
    UnknownTableError,
    UnknownUdfError,
)
from ..relation import DATE, FLOAT64, INT64, STRING, date_to_days
from .ast import (
    BoundQuery,
    ColumnRef,
    Comparison,
    Literal,
    ParsedQuery,
    UdfCall,
    expr_columns,
    walk_expr,
)
from .parser import render_expr


def bind(parsed: ParsedQuery, catalog, udf_registry=None) -> BoundQuery:
    """Resolve every name in the query; raises on the first failure."""
    table_schemas = {}
    for t in parsed.from_tables:
        if not catalog.has_table(t):
            raise UnknownTableError(t)
        table_schemas[t] = catalog.table(t).schema

    column_table: dict[str, str] = {}

    def resolve(name: str) -> str:
        if name in column_table:
            return column_table[name]
        owners = [t for t, s in table_schemas.items() if s.has_column(name)]
        if not owners:
            raise UnknownColumnError(name)
        if len(set(owners)) > 1:
            raise AmbiguousColumnError(f"{name} is in tables {sorted(set(owners))}")
        column_table[name] = owners[0]
        return owners[0]

    aliases = {}
    output_names = []
    for i, item in enumerate(parsed.select_items):
        if item.alias:
            aliases[item.alias] = i
            output_names.append(item.alias)
        elif isinstance(item.expr, ColumnRef):
            output_names.append(item.expr.name)
        else:
            output_names.append(render_expr(item.expr))

    udf_signatures = {}
    for item in parsed.select_items:
        for e in walk_expr(item.expr):
            if isinstance(e, UdfCall):
                if udf_registry is None or not udf_registry.has(e.name):
                    raise UnknownUdfError(e.name)
                counts = udf_registry.get(e.name).arg_column_counts
                expected = sum(counts)
                if len(e.args) != expected:
                    raise UdfArityMismatchError(
                        f"{e.name} expects {expected} column(s), got {len(e.args)}"
                    )
                udf_signatures[e.name] = list(counts)

    for item in parsed.select_items:
        for name in expr_columns(item.expr):
            resolve(name)
    for c in parsed.group_by:
        resolve(c.name)
    for cmp_ in parsed.where:
        _bind_comparison(cmp_, resolve, table_schemas, column_table)
    for o in parsed.order_by:
        for name in expr_columns(o.expr):
            if name not in aliases:
                resolve(name)

    typed_where = [
        _coerce_literal(cmp_, table_schemas, column_table) for cmp_ in parsed.where
    ]
    return BoundQuery(
        parsed=parsed,
        table_schemas=table_schemas,
        column_table=column_table,
        udf_signatures=udf_signatures,
        output_names=output_names,
        aliases=aliases,
        typed_where=typed_where,
    )


def _bind_comparison(cmp_: Comparison, resolve, table_schemas, column_table) -> None:
    sides = [cmp_.left, cmp_.right]
    for side in sides:
        if isinstance(side, ColumnRef):
            resolve(side.name)
    if all(isinstance(s, ColumnRef) for s in sides):
        lt = _column_type(cmp_.left.name, table_schemas, column_table)
        rt = _column_type(cmp_.right.name, table_schemas, column_table)
        if not _comparable(lt, rt):
            raise TypeMismatchError(
                f"cannot compare {cmp_.left.name} ({lt}) with {cmp_.right.name} ({rt})"
            )


def _column_type(name, table_schemas, column_table) -> str:
    return table_schemas[column_table[name]].type_of(name)


def _comparable(a: str, b: str) -> bool:
    if a == b:
        return True
    return {a, b} <= {INT64, FLOAT64}


def _coerce_literal(cmp_: Comparison, table_schemas, column_table) -> Comparison:
    """Type the literal side of a column/literal comparison."""
    left, right = cmp_.left, cmp_.right
    if isinstance(left, ColumnRef) and isinstance(right, Literal):
        return Comparison(left=left, op=cmp_.op, right=_typed(right, _column_type(left.name, table_schemas, column_table), left.name))
    if isinstance(left, Literal) and isinstance(right, ColumnRef):
        return Comparison(left=_typed(left, _column_type(right.name, table_schemas, column_table), right.name), op=cmp_.op, right=right)
    return cmp_


def _typed(lit: Literal, col_type: str, col_name: str) -> Literal:
    if col_type == DATE:
        if lit.kind != "string":
            raise TypeMismatchError(f"column {col_name} is a date; compare with 'YYYY-MM-DD'")
        try:
            return Literal(value=date_to_days(str(lit.value)), kind="number")
        except ValueError as exc:
            raise TypeMismatchError(f"bad date literal {lit.value!r} for {col_name}") from exc
    if col_type in (INT64, FLOAT64):
        if lit.kind != "number":
            raise TypeMismatchError(f"column {col_name} is numeric; got string literal")
        return lit
    if col_type == STRING and lit.kind != "string":
        raise TypeMismatchError(f"column {col_name} is a string; got number literal")
    return lit
