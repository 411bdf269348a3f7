"""Hand-written lexer and recursive-descent parser for the SQL subset.

Grammar (keywords case-insensitive, identifiers case-preserving):

  query   := SELECT item (',' item)* FROM ident (',' ident)*
             [WHERE cmp (AND cmp)*] [GROUP BY col (',' col)*]
             [ORDER BY ord (',' ord)*] [LIMIT int] [';']
  item    := expr [[AS] ident]
  expr    := term (('+'|'-') term)*
  term    := factor (('*'|'/') factor)*
  factor  := number | string | ident | call | '(' expr ')' | '-' factor
  call    := aggname '(' ('*' | expr) ')' | ident '(' col (',' col)* ')'
  cmp     := operand ('='|'<'|'<='|'>'|'>='|'<>') operand
  operand := ident | number | string
  ord     := expr [ASC|DESC]

Anything outside this raises SqlSyntaxError with the character position;
parse never raises anything else.
"""

from __future__ import annotations

import re

from ..errors import SqlSyntaxError
from .ast import (
    AGGREGATE_FUNCS,
    AggCall,
    BinaryOp,
    ColumnRef,
    Comparison,
    Expr,
    Literal,
    OrderItem,
    ParsedQuery,
    QueryMetadata,
    SelectItem,
    UdfCall,
    expr_columns,
    has_aggregate,
    has_udf,
    walk_expr,
)

_KEYWORDS = {
    "SELECT", "FROM", "WHERE", "GROUP", "BY", "ORDER", "LIMIT",
    "AS", "AND", "ASC", "DESC",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+\.\d*([eE][+-]?\d+)?|\.\d+([eE][+-]?\d+)?|\d+([eE][+-]?\d+)?)
  | (?P<string>'(?:[^']|'')*')
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><>|<=|>=|[=<>+\-*/(),;])
    """,
    re.VERBOSE,
)


class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind = kind  # number | string | ident | op | keyword | eof
        self.text = text
        self.pos = pos

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.pos})"


def _lex(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SqlSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            kind = m.lastgroup
            tok_text = m.group()
            if kind == "ident" and tok_text.upper() in _KEYWORDS:
                kind = "keyword"
                tok_text = tok_text.upper()
            tokens.append(_Token(kind, tok_text, pos))
        pos = m.end()
    tokens.append(_Token("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str) -> SqlSyntaxError:
        return SqlSyntaxError(message, self.peek().pos)

    def expect_keyword(self, kw: str) -> _Token:
        tok = self.peek()
        if tok.kind != "keyword" or tok.text != kw:
            raise self.error(f"expected {kw}")
        return self.next()

    def accept_keyword(self, kw: str) -> bool:
        tok = self.peek()
        if tok.kind == "keyword" and tok.text == kw:
            self.next()
            return True
        return False

    def accept_op(self, op: str) -> bool:
        tok = self.peek()
        if tok.kind == "op" and tok.text == op:
            self.next()
            return True
        return False

    def expect_op(self, op: str) -> None:
        if not self.accept_op(op):
            raise self.error(f"expected {op!r}")

    def expect_ident(self, what: str) -> str:
        tok = self.peek()
        if tok.kind != "ident":
            raise self.error(f"expected {what}")
        return self.next().text

    # -- grammar --

    def parse_query(self) -> ParsedQuery:
        self.expect_keyword("SELECT")
        items = [self.parse_select_item()]
        while self.accept_op(","):
            items.append(self.parse_select_item())
        self.expect_keyword("FROM")
        tables = [self.expect_ident("table name")]
        while self.accept_op(","):
            tables.append(self.expect_ident("table name"))

        where: list[Comparison] = []
        if self.accept_keyword("WHERE"):
            where.append(self.parse_comparison())
            while self.accept_keyword("AND"):
                where.append(self.parse_comparison())

        group_by: list[ColumnRef] = []
        if self.accept_keyword("GROUP"):
            self.expect_keyword("BY")
            group_by.append(ColumnRef(self.expect_ident("column name")))
            while self.accept_op(","):
                group_by.append(ColumnRef(self.expect_ident("column name")))

        order_by: list[OrderItem] = []
        if self.accept_keyword("ORDER"):
            self.expect_keyword("BY")
            order_by.append(self.parse_order_item())
            while self.accept_op(","):
                order_by.append(self.parse_order_item())

        limit = None
        if self.accept_keyword("LIMIT"):
            tok = self.peek()
            if tok.kind != "number" or not tok.text.isdigit():
                raise self.error("expected non-negative integer after LIMIT")
            limit = int(self.next().text)

        self.accept_op(";")
        if self.peek().kind != "eof":
            raise self.error("unexpected trailing input")

        return ParsedQuery(
            select_items=tuple(items),
            from_tables=tuple(tables),
            where=tuple(where),
            group_by=tuple(group_by),
            order_by=tuple(order_by),
            limit=limit,
        )

    def parse_select_item(self) -> SelectItem:
        expr = self.parse_expr()
        alias = None
        if self.accept_keyword("AS"):
            alias = self.expect_ident("alias")
        elif self.peek().kind == "ident":
            alias = self.next().text
        return SelectItem(expr=expr, alias=alias)

    def parse_order_item(self) -> OrderItem:
        expr = self.parse_expr()
        desc = False
        if self.accept_keyword("DESC"):
            desc = True
        else:
            self.accept_keyword("ASC")
        return OrderItem(expr=expr, desc=desc)

    def parse_expr(self) -> Expr:
        left = self.parse_term()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in ("+", "-"):
                self.next()
                left = BinaryOp(op=tok.text, left=left, right=self.parse_term())
            else:
                return left

    def parse_term(self) -> Expr:
        left = self.parse_factor()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in ("*", "/"):
                self.next()
                left = BinaryOp(op=tok.text, left=left, right=self.parse_factor())
            else:
                return left

    def parse_factor(self) -> Expr:
        tok = self.peek()
        if tok.kind == "number":
            self.next()
            return _number_literal(tok.text)
        if tok.kind == "string":
            self.next()
            return Literal(value=tok.text[1:-1].replace("''", "'"), kind="string")
        if tok.kind == "op" and tok.text == "(":
            self.next()
            expr = self.parse_expr()
            self.expect_op(")")
            return expr
        if tok.kind == "op" and tok.text == "-":
            self.next()
            inner = self.parse_factor()
            if isinstance(inner, Literal) and inner.kind == "number":
                return Literal(value=-inner.value, kind="number")
            return BinaryOp(op="-", left=Literal(value=0, kind="number"), right=inner)
        if tok.kind == "ident":
            name = self.next().text
            if self.accept_op("("):
                return self.parse_call(name)
            return ColumnRef(name)
        raise self.error("expected expression")

    def parse_call(self, name: str) -> Expr:
        if name.lower() in AGGREGATE_FUNCS:
            func = name.lower()
            if func == "count" and self.accept_op("*"):
                self.expect_op(")")
                return AggCall(func="count", arg=None)
            arg = self.parse_expr()
            self.expect_op(")")
            if has_aggregate(arg) or has_udf(arg):
                raise self.error(f"nested call inside {func}()")
            return AggCall(func=func, arg=arg)
        # anything else is a UDF call; arguments must be plain columns
        args = [self.parse_udf_arg()]
        while self.accept_op(","):
            args.append(self.parse_udf_arg())
        self.expect_op(")")
        return UdfCall(name=name, args=tuple(args))

    def parse_udf_arg(self) -> ColumnRef:
        tok = self.peek()
        if tok.kind != "ident":
            raise self.error("UDF arguments must be column references")
        return ColumnRef(self.next().text)

    def parse_comparison(self) -> Comparison:
        left = self.parse_operand()
        tok = self.peek()
        if tok.kind != "op" or tok.text not in ("=", "<", "<=", ">", ">=", "<>"):
            raise self.error("expected comparison operator")
        self.next()
        right = self.parse_operand()
        return Comparison(left=left, op=tok.text, right=right)

    def parse_operand(self):
        tok = self.peek()
        if tok.kind == "ident":
            return ColumnRef(self.next().text)
        if tok.kind == "number":
            self.next()
            return _number_literal(tok.text)
        if tok.kind == "string":
            self.next()
            return Literal(value=tok.text[1:-1].replace("''", "'"), kind="string")
        if tok.kind == "op" and tok.text == "-":
            self.next()
            num = self.peek()
            if num.kind != "number":
                raise self.error("expected number after unary minus")
            lit = _number_literal(self.next().text)
            return Literal(value=-lit.value, kind="number")
        raise self.error("expected column, number, or string")


def _number_literal(text: str) -> Literal:
    if re.fullmatch(r"\d+", text):
        return Literal(value=int(text), kind="number")
    return Literal(value=float(text), kind="number")


def _validate(q: ParsedQuery, full_text: str) -> None:
    group_names = {c.name for c in q.group_by}
    any_agg = any(has_aggregate(it.expr) for it in q.select_items)
    for it in q.select_items:
        if isinstance(it.expr, UdfCall):
            if len(q.select_items) != 1:
                raise SqlSyntaxError("a UDF call must be the only select item", 0)
            continue
        if has_udf(it.expr):
            raise SqlSyntaxError("UDF calls may only appear bare in the select list", 0)
        if any_agg or q.group_by:
            if not has_aggregate(it.expr):
                bad = [c for c in expr_columns(it.expr) if c not in group_names]
                if bad:
                    raise SqlSyntaxError(
                        f"column {bad[0]!r} must appear in GROUP BY or inside an aggregate",
                        full_text.find(bad[0]) if bad[0] in full_text else 0,
                    )


def _metadata(q: ParsedQuery) -> QueryMetadata:
    columns: set[str] = set()
    udfs: set[str] = set()
    for it in q.select_items:
        for e in walk_expr(it.expr):
            if isinstance(e, ColumnRef):
                columns.add(e.name)
            elif isinstance(e, UdfCall):
                udfs.add(e.name)
    for cmp_ in q.where:
        for side in (cmp_.left, cmp_.right):
            if isinstance(side, ColumnRef):
                columns.add(side.name)
    for c in q.group_by:
        columns.add(c.name)
    aliases = {it.alias for it in q.select_items if it.alias}
    for o in q.order_by:
        for e in walk_expr(o.expr):
            if isinstance(e, ColumnRef) and e.name not in aliases:
                columns.add(e.name)
    return QueryMetadata(
        table_names=frozenset(q.from_tables),
        column_names=frozenset(columns),
        udf_names=frozenset(udfs),
    )


def parse(sql_text: str) -> tuple[ParsedQuery, QueryMetadata]:
    """Parse one SQL statement; returns the tree and its name metadata.

    Raises SqlSyntaxError (and nothing else) on any malformed input.
    """
    if not sql_text or not sql_text.strip():
        raise SqlSyntaxError("empty query text", 0)
    tokens = _lex(sql_text)
    try:
        parsed = _Parser(tokens).parse_query()
    except RecursionError:
        raise SqlSyntaxError("expression nested too deeply", 0) from None
    _validate(parsed, sql_text)
    return parsed, _metadata(parsed)


# --- canonical rendering (round-trip support) ---


def render_expr(expr: Expr) -> str:
    if isinstance(expr, ColumnRef):
        return expr.name
    if isinstance(expr, Literal):
        if expr.kind == "string":
            return "'" + str(expr.value).replace("'", "''") + "'"
        return repr(expr.value)
    if isinstance(expr, BinaryOp):
        return f"({render_expr(expr.left)} {expr.op} {render_expr(expr.right)})"
    if isinstance(expr, AggCall):
        inner = "*" if expr.arg is None else render_expr(expr.arg)
        return f"{expr.func}({inner})"
    if isinstance(expr, UdfCall):
        return f"{expr.name}({', '.join(a.name for a in expr.args)})"
    raise TypeError(f"not an expression: {expr!r}")


def render_sql(q: ParsedQuery) -> str:
    """Canonical text form; parse(render_sql(q)) is structurally equal to q."""
    parts = ["SELECT "]
    items = []
    for it in q.select_items:
        s = render_expr(it.expr)
        if it.alias:
            s += f" AS {it.alias}"
        items.append(s)
    parts.append(", ".join(items))
    parts.append(" FROM " + ", ".join(q.from_tables))
    if q.where:
        rendered = [
            f"{render_expr(c.left)} {c.op} {render_expr(c.right)}" for c in q.where
        ]
        parts.append(" WHERE " + " AND ".join(rendered))
    if q.group_by:
        parts.append(" GROUP BY " + ", ".join(c.name for c in q.group_by))
    if q.order_by:
        rendered = [
            render_expr(o.expr) + (" DESC" if o.desc else " ASC") for o in q.order_by
        ]
        parts.append(" ORDER BY " + ", ".join(rendered))
    if q.limit is not None:
        parts.append(f" LIMIT {q.limit}")
    return "".join(parts)
