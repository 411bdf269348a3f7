"""Core relational data types: schemas, partitions, partitioned relations.

Rows are plain tuples. Values are int, float, str, or (for the date type)
the proleptic-Gregorian ordinal day as an int, so every comparison and
index operation stays integer-cheap. Conversion back to ISO text happens
only at output boundaries.
"""

from __future__ import annotations

import datetime
from dataclasses import dataclass, field

INT64 = "int64"
FLOAT64 = "float64"
DATE = "date"
STRING = "string"

COLUMN_TYPES = (INT64, FLOAT64, DATE, STRING)

Row = tuple


def date_to_days(text: str) -> int:
    """ISO YYYY-MM-DD -> ordinal day count."""
    return datetime.date.fromisoformat(text).toordinal()


def days_to_date(days: int) -> str:
    return datetime.date.fromordinal(days).isoformat()


@dataclass(frozen=True)
class Schema:
    """Ordered (name, type) column list. Names unique, at least one column."""

    columns: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if not self.columns:
            raise ValueError("schema needs at least one column")
        names = [c[0] for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate column names in schema: {names}")
        for _, typ in self.columns:
            if typ not in COLUMN_TYPES:
                raise ValueError(f"unknown column type {typ!r}")

    @staticmethod
    def of(*cols: tuple[str, str]) -> "Schema":
        return Schema(tuple(cols))

    @property
    def names(self) -> list[str]:
        return [c[0] for c in self.columns]

    def index_of(self, name: str) -> int:
        for i, (n, _) in enumerate(self.columns):
            if n == name:
                return i
        raise KeyError(name)

    def type_of(self, name: str) -> str:
        return self.columns[self.index_of(name)][1]

    def has_column(self, name: str) -> bool:
        return any(n == name for n, _ in self.columns)

    def project(self, names: list[str]) -> "Schema":
        return Schema(tuple((n, self.type_of(n)) for n in names))

    def concat(self, other: "Schema") -> "Schema":
        return Schema(self.columns + other.columns)


@dataclass
class Partition:
    """One run of rows. ordinal is 1-based and unique within a relation."""

    rows: list[Row]
    ordinal: int

    def __post_init__(self):
        if self.ordinal < 1:
            raise ValueError("partition ordinal must be >= 1")

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class PartitionedRelation:
    """A schema plus an ordered list of row partitions; the unit of parallel work.

    If sorted_on is set, the concatenation of partitions is non-decreasing on
    that column and no key value spans a partition boundary.
    """

    schema: Schema
    partitions: list[Partition] = field(default_factory=list)
    sorted_on: str | None = None

    @property
    def row_count(self) -> int:
        return sum(len(p) for p in self.partitions)

    def all_rows(self) -> list[Row]:
        out: list[Row] = []
        for p in self.partitions:
            out.extend(p.rows)
        return out

    def check_invariants(self) -> None:
        for i, p in enumerate(self.partitions, start=1):
            if p.ordinal != i:
                raise ValueError(f"partition ordinals not consecutive at {i}")
        if self.sorted_on is not None:
            col = self.schema.index_of(self.sorted_on)
            prev = None
            for p in self.partitions:
                for row in p.rows:
                    if prev is not None and row[col] < prev:
                        raise ValueError(f"rows not sorted on {self.sorted_on}")
                    prev = row[col]


def split_rows(schema: Schema, rows: list[Row], partition_size: int) -> PartitionedRelation:
    """Split rows in order into ceil(n/size) partitions."""
    if partition_size < 1:
        raise ValueError("partition_size must be >= 1")
    parts = [
        Partition(rows=rows[i : i + partition_size], ordinal=i // partition_size + 1)
        for i in range(0, len(rows), partition_size)
    ]
    return PartitionedRelation(schema=schema, partitions=parts)


def split_sorted_rows(
    schema: Schema, rows: list[Row], partition_size: int, sort_col: str
) -> PartitionedRelation:
    """Split rows already sorted on sort_col, keeping equal keys in one partition.

    A split point is moved back to the start of a duplicate run so no key value
    spans a boundary. A run longer than partition_size becomes one oversized
    partition; that is the only case where the size cap is exceeded.
    """
    if partition_size < 1:
        raise ValueError("partition_size must be >= 1")
    col = schema.index_of(sort_col)
    parts: list[Partition] = []
    start = 0
    n = len(rows)
    while start < n:
        end = min(start + partition_size, n)
        if end < n and rows[end][col] == rows[end - 1][col]:
            # back the cut up to the start of the duplicate run
            cut = end
            while cut > start and rows[cut - 1][col] == rows[end][col]:
                cut -= 1
            if cut > start:
                end = cut
            else:
                # the whole run fills this partition and beyond: swallow it
                while end < n and rows[end][col] == rows[start][col]:
                    end += 1
        parts.append(Partition(rows=rows[start:end], ordinal=len(parts) + 1))
        start = end
    return PartitionedRelation(schema=schema, partitions=parts, sorted_on=sort_col)


def format_value(value, col_type: str) -> str:
    if col_type == DATE:
        return days_to_date(value)
    if col_type == FLOAT64:
        return repr(float(value))
    return str(value)
