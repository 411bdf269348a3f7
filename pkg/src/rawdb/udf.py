"""User-defined functions callable from the SQL select list.

A UDF is any host callable registered with the column count of each frame
argument, e.g. register("myKMeans", fn, [2]) for a function taking one
two-column frame. The engine passes ColumnFrame objects (named columns of
equal length, names taken from the query) and treats the callable as
opaque: only arity and result shape are checked. A result may be a frame
(becomes a relation), a scalar (a 1x1 relation), or None (an empty
relation, for display-only functions).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from .errors import (
    DuplicateUdfError,
    InvalidArityError,
    UdfArityMismatchError,
    UdfRaisedError,
    UnknownUdfError,
)
from .relation import FLOAT64, INT64, STRING


class ColumnFrame:
    """Named columns of equal length; column order is meaningful."""

    def __init__(self, columns: dict[str, list]):
        lengths = {len(v) for v in columns.values()}
        if len(lengths) > 1:
            raise ValueError("frame columns must have equal length")
        self._columns = dict(columns)

    @property
    def columns(self) -> list[str]:
        return list(self._columns)

    def __getitem__(self, name: str) -> list:
        return self._columns[name]

    def __len__(self) -> int:
        for v in self._columns.values():
            return len(v)
        return 0

    @property
    def width(self) -> int:
        return len(self._columns)

    def rows(self) -> list[tuple]:
        return list(zip(*self._columns.values())) if self._columns else []

    def __eq__(self, other):
        return isinstance(other, ColumnFrame) and self._columns == other._columns

    def __repr__(self):
        return f"ColumnFrame({list(self._columns)}, n={len(self)})"


@dataclass(frozen=True)
class UdfDescriptor:
    name: str
    arg_column_counts: tuple[int, ...]
    fn: object


@dataclass
class UdfResult:
    kind: str  # "frame" | "scalar" | "none"
    rows: list
    layout: list  # [(name, type)]


class UdfRegistry:
    """Name -> descriptor map; registration is serialized, reads are free."""

    def __init__(self):
        self._udfs: dict[str, UdfDescriptor] = {}
        self._lock = threading.Lock()

    def register(self, name: str, fn, arg_column_counts: list[int]) -> None:
        if any(c < 1 for c in arg_column_counts) or not arg_column_counts:
            raise InvalidArityError(f"{name}: column counts must all be >= 1")
        with self._lock:
            if name in self._udfs:
                raise DuplicateUdfError(name)
            self._udfs[name] = UdfDescriptor(
                name=name, arg_column_counts=tuple(arg_column_counts), fn=fn
            )

    def has(self, name: str) -> bool:
        return name in self._udfs

    def get(self, name: str) -> UdfDescriptor:
        try:
            return self._udfs[name]
        except KeyError:
            raise UnknownUdfError(name) from None

    def names(self) -> list[str]:
        return sorted(self._udfs)

    def invoke(self, name: str, frames: list[ColumnFrame]) -> UdfResult:
        """Call the UDF once with the frames and wrap whatever comes back."""
        desc = self.get(name)
        counts = desc.arg_column_counts
        if len(frames) != len(counts):
            raise UdfArityMismatchError(
                f"{name} expects {len(counts)} frame(s), got {len(frames)}"
            )
        for frame, want in zip(frames, counts):
            if frame.width != want:
                raise UdfArityMismatchError(
                    f"{name} expects a {want}-column frame, got {frame.width}"
                )
        try:
            result = desc.fn(*frames)
        except Exception as exc:
            raise UdfRaisedError(name, exc) from exc
        return _wrap_result(result)


def _value_type(v) -> str:
    if isinstance(v, bool):
        return STRING
    if isinstance(v, int):
        return INT64
    if isinstance(v, float):
        return FLOAT64
    return STRING


def _wrap_result(result) -> UdfResult:
    if result is None:
        return UdfResult(kind="none", rows=[], layout=[("result", STRING)])
    if isinstance(result, dict):
        result = ColumnFrame(result)
    if isinstance(result, ColumnFrame):
        rows = result.rows()
        layout = []
        for name in result.columns:
            col = result[name]
            layout.append((name, _value_type(col[0]) if col else FLOAT64))
        return UdfResult(kind="frame", rows=rows, layout=layout)
    if isinstance(result, (int, float, str)):
        return UdfResult(
            kind="scalar", rows=[(result,)], layout=[("result", _value_type(result))]
        )
    raise UdfRaisedError(
        "<wrap>", TypeError(f"unsupported UDF result type {type(result).__name__}")
    )


def frames_for_call(
    registry: UdfRegistry, name: str, arg_cols: list[str], row_names: list[str], rows: list
) -> list[ColumnFrame]:
    """Slice row tuples into the frames declared for the UDF.

    arg_cols are consumed left to right, one frame per declared count, so
    frame column order follows the select-list argument order.
    """
    desc = registry.get(name)
    frames = []
    pos = 0
    for count in desc.arg_column_counts:
        cols = {}
        for col_name in arg_cols[pos : pos + count]:
            i = row_names.index(col_name)
            cols[col_name] = [r[i] for r in rows]
        frames.append(ColumnFrame(cols))
        pos += count
    return frames
