"""Table registration, schema inference, partition loading, persistence cache.

Raw files stay where they are; the catalog records how to read them. A
registered table is ingested lazily by load_partitions and the result can be
pinned in the in-memory persistence cache so repeated reads skip the file.

Supported formats:
  csv   comma-separated, optional header row (detected, or forced via header=)
  tbl   pipe-delimited without header, trailing '|' tolerated (dbgen output)
"""

from __future__ import annotations

import configparser
import csv
import os
import re
import threading
from dataclasses import dataclass, field

from .errors import (
    DuplicateTableError,
    EmptyFileError,
    KeyConflictError,
    ParseError,
    RaggedRowsError,
    UnsupportedFormatError,
)
from .relation import (
    DATE,
    FLOAT64,
    INT64,
    STRING,
    PartitionedRelation,
    Row,
    Schema,
    date_to_days,
    split_rows,
    split_sorted_rows,
)

FORMATS = ("csv", "tbl")

SCHEMA_SAMPLE_ROWS = 1000

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_INT_RE = re.compile(r"^[+-]?\d+$")
_FLOAT_RE = re.compile(r"^[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?$")


@dataclass(frozen=True)
class TableHandle:
    name: str
    path: str
    format: str
    schema: Schema
    has_header: bool = False
    sort_by: str | None = None


@dataclass(frozen=True)
class PersistKey:
    """Cache key derived from (table, transform fingerprint, sort column)."""

    token: str

    @staticmethod
    def for_relation(table: str, transform: str, sort_col: str | None = None) -> "PersistKey":
        return PersistKey(token=f"{table}|{transform}|{sort_col or '-'}")


def _cell_kind(text: str) -> str:
    if _INT_RE.match(text):
        return INT64
    if _FLOAT_RE.match(text):
        return FLOAT64
    if _DATE_RE.match(text):
        return DATE
    return STRING


def _widen(a: str, b: str) -> str:
    if a == b:
        return a
    if {a, b} <= {INT64, FLOAT64}:
        return FLOAT64
    return STRING


def _split_line(line: str, fmt: str) -> list[str]:
    if fmt == "tbl":
        if line.endswith("|"):
            line = line[:-1]
        return line.split("|")
    return next(csv.reader([line]))


def _read_lines(path: str) -> list[str]:
    with open(path, "r", newline="") as f:
        return [ln.rstrip("\r\n") for ln in f if ln.strip("\r\n") != ""]


def _looks_like_header(first: list[str], second: list[str] | None) -> bool:
    # a header has no typed cell while some later row does
    if any(_cell_kind(c) != STRING for c in first):
        return False
    if second is None:
        return False
    return any(_cell_kind(c) != STRING for c in second)


def infer_schema(path: str, fmt: str, header: bool | None = None) -> Schema:
    """Assign each column the narrowest type consistent with the sampled rows.

    Sample is the first SCHEMA_SAMPLE_ROWS data rows. Widening order is
    int64 -> float64 -> string; dates (YYYY-MM-DD) widen only to string.
    header=None auto-detects a csv header row; tbl files never have one.
    """
    if fmt not in FORMATS:
        raise UnsupportedFormatError(f"unsupported format {fmt!r}")
    lines = _read_lines(path)
    if not lines:
        raise EmptyFileError(path)
    rows = [_split_line(ln, fmt) for ln in lines[: SCHEMA_SAMPLE_ROWS + 1]]
    if fmt == "tbl":
        has_header = False
    elif header is not None:
        has_header = header
    else:
        has_header = _looks_like_header(rows[0], rows[1] if len(rows) > 1 else None)

    if has_header:
        names = rows[0]
        data = rows[1 : SCHEMA_SAMPLE_ROWS + 1]
    else:
        names = [f"col{i + 1}" for i in range(len(rows[0]))]
        data = rows[:SCHEMA_SAMPLE_ROWS]
    if not data:
        raise EmptyFileError(f"{path}: header but no data rows")

    width = len(data[0])
    types: list[str | None] = [None] * width
    for r in data:
        if len(r) != width:
            raise RaggedRowsError(f"{path}: rows with differing field counts")
        for i, cell in enumerate(r):
            kind = _cell_kind(cell)
            types[i] = kind if types[i] is None else _widen(types[i], kind)
    return Schema(tuple(zip(names, [t or STRING for t in types])))


def parse_cell(text: str, col_type: str):
    if col_type == INT64:
        return int(text)
    if col_type == FLOAT64:
        return float(text)
    if col_type == DATE:
        return date_to_days(text)
    return text


class Catalog:
    """Registered tables plus the persistence cache.

    Reads are lock-free once registered; registrations and persists go through
    a single writer lock. Loaded partitions are immutable and shared freely.
    """

    def __init__(self):
        self._tables: dict[str, TableHandle] = {}
        self._cache: dict[str, PartitionedRelation] = {}
        self._write_lock = threading.Lock()
        self.ingest_count = 0  # file parses performed (cache misses)

    # -- registration --

    def register_table(
        self,
        name: str,
        path: str,
        fmt: str,
        schema: Schema | None = None,
        sort_by: str | None = None,
        header: bool | None = None,
    ) -> TableHandle:
        if fmt not in FORMATS:
            raise UnsupportedFormatError(f"unsupported format {fmt!r}")
        if not os.path.isfile(path):
            raise FileNotFoundError(path)
        with self._write_lock:
            if name in self._tables:
                raise DuplicateTableError(name)
            if schema is None:
                inferred = infer_schema(path, fmt, header=header)
                has_header = fmt == "csv" and self._file_has_header(path, fmt, header)
                schema = inferred
            else:
                has_header = bool(header)
            if sort_by is not None and not schema.has_column(sort_by):
                raise KeyError(f"sort_by column {sort_by!r} not in schema of {name!r}")
            handle = TableHandle(
                name=name, path=path, format=fmt, schema=schema,
                has_header=has_header, sort_by=sort_by,
            )
            self._tables[name] = handle
            return handle

    def _file_has_header(self, path: str, fmt: str, header: bool | None) -> bool:
        if fmt == "tbl":
            return False
        if header is not None:
            return header
        lines = _read_lines(path)
        first = _split_line(lines[0], fmt)
        second = _split_line(lines[1], fmt) if len(lines) > 1 else None
        return _looks_like_header(first, second)

    def table(self, name: str) -> TableHandle:
        return self._tables[name]

    def has_table(self, name: str) -> bool:
        return name in self._tables

    def tables(self) -> list[TableHandle]:
        return list(self._tables.values())

    # -- ingestion --

    def read_rows(self, handle: TableHandle) -> list[Row]:
        """Parse the whole file into typed rows (file order)."""
        lines = _read_lines(handle.path)
        if handle.has_header:
            lines = lines[1:]
        ncols = len(handle.schema.columns)
        types = [t for _, t in handle.schema.columns]
        rows: list[Row] = []
        for rowno, line in enumerate(lines, start=1):
            cells = _split_line(line, handle.format)
            if len(cells) != ncols:
                raise ParseError(
                    f"expected {ncols} fields, got {len(cells)}", rowno
                )
            try:
                rows.append(tuple(parse_cell(c, t) for c, t in zip(cells, types)))
            except ValueError as exc:
                raise ParseError(str(exc), rowno) from exc
        self.ingest_count += 1
        return rows

    def load_partitions(self, handle: TableHandle, partition_size: int) -> PartitionedRelation:
        """ceil(rows/size) partitions, ordinals 1..n, rows kept in file order."""
        rows = self.read_rows(handle)
        return split_rows(handle.schema, rows, partition_size)

    def load_sorted(self, handle: TableHandle, partition_size: int, sort_col: str) -> PartitionedRelation:
        """Load, sort on sort_col, and split so no key spans a boundary."""
        rows = self.read_rows(handle)
        col = handle.schema.index_of(sort_col)
        rows.sort(key=lambda r: r[col])
        return split_sorted_rows(handle.schema, rows, partition_size, sort_col)

    # -- persistence cache --

    def persist(self, relation: PartitionedRelation, key: PersistKey) -> None:
        with self._write_lock:
            existing = self._cache.get(key.token)
            if existing is not None:
                if existing is relation or _same_contents(existing, relation):
                    return  # idempotent re-persist
                raise KeyConflictError(key.token)
            self._cache[key.token] = relation

    def lookup_persisted(self, key: PersistKey) -> PartitionedRelation | None:
        return self._cache.get(key.token)

    def release(self, key: PersistKey) -> None:
        with self._write_lock:
            self._cache.pop(key.token, None)

    def clear_cache(self) -> None:
        with self._write_lock:
            self._cache.clear()


def _same_contents(a: PartitionedRelation, b: PartitionedRelation) -> bool:
    if a.schema != b.schema or len(a.partitions) != len(b.partitions):
        return False
    return all(pa.rows == pb.rows for pa, pb in zip(a.partitions, b.partitions))


def load_catalog_config(path: str) -> list[dict]:
    """Parse a catalog config file (INI sections, one per table).

    [lineitem]
    path = data/lineitem.tbl
    format = tbl
    sort_by = l_orderkey
    schema = l_orderkey:int64,l_partkey:int64,...   (optional)
    """
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise FileNotFoundError(path)
    entries = []
    base = os.path.dirname(os.path.abspath(path))
    for section in cp.sections():
        if section == "engine":
            continue
        opts = cp[section]
        table_path = opts["path"]
        if not os.path.isabs(table_path):
            table_path = os.path.join(base, table_path)
        entry = {
            "name": section,
            "path": table_path,
            "format": opts.get("format", "csv"),
            "sort_by": opts.get("sort_by", None),
        }
        if "schema" in opts:
            cols = []
            for spec in opts["schema"].split(","):
                col_name, _, col_type = spec.strip().partition(":")
                cols.append((col_name, col_type))
            entry["schema"] = Schema(tuple(cols))
        if "header" in opts:
            entry["header"] = opts.getboolean("header")
        entries.append(entry)
    return entries


def load_engine_config(path: str) -> dict:
    """Read the optional [engine] section (workers, partition_size, ...)."""
    cp = configparser.ConfigParser()
    cp.read(path)
    if "engine" not in cp:
        return {}
    return dict(cp["engine"])
