from .ast import (
    AggCall,
    BinaryOp,
    BoundQuery,
    ColumnRef,
    Comparison,
    Literal,
    OrderItem,
    ParsedQuery,
    QueryMetadata,
    SelectItem,
    UdfCall,
)
from .binder import bind
from .parser import parse, render_sql

__all__ = [
    "AggCall",
    "BinaryOp",
    "BoundQuery",
    "ColumnRef",
    "Comparison",
    "Literal",
    "OrderItem",
    "ParsedQuery",
    "QueryMetadata",
    "SelectItem",
    "UdfCall",
    "bind",
    "parse",
    "render_sql",
]
