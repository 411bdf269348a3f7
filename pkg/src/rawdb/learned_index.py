"""Sparse learned index over the partition layout of a sorted relation.

The index stores one (begin, end, ordinal) triple per partition. Membership
is the step function obtained by summing a partition function
P(a, b, c)(y) = H((b - y) * (y - a)) * c over all triples, where H is the
Heaviside step. The shipped probe is a binary search over range starts; the
literal sum form is kept alongside as the semantics oracle and the two are
pinned equal by tests.

Ordinal 0 is the reserved "no partition" result.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    InvalidRangeError,
    NotSortedError,
    OverlappingPartitionsError,
    TypeMismatchError,
)
from .relation import DATE, INT64, Partition, PartitionedRelation, Schema


def heaviside(x) -> int:
    """H(x): 0 for x < 0, 1 for x >= 0."""
    return 0 if x < 0 else 1


def partition_fn(a: int, b: int, c: int, y: int) -> int:
    """Return c iff a <= y <= b, else 0, via the Heaviside composition."""
    if a > b:
        raise InvalidRangeError(f"begin {a} > end {b}")
    return heaviside((b - y) * (y - a)) * c


@dataclass(frozen=True)
class PartitionRange:
    a: int  # first key in the partition
    b: int  # last key in the partition
    c: int  # partition ordinal, >= 1

    def __post_init__(self):
        if self.a > self.b:
            raise InvalidRangeError(f"begin {self.a} > end {self.b}")
        if self.c < 1:
            raise ValueError("partition ordinal must be >= 1")


@dataclass(frozen=True)
class LearnedIndex:
    """Non-overlapping ranges sorted by begin key, ordinals 1..n."""

    ranges: tuple[PartitionRange, ...]
    source: tuple[str, str]  # (table name, column name)

    def probe_sum(self, key: int) -> int:
        """Literal sum of partition functions; the Eq-composition oracle."""
        return sum(partition_fn(r.a, r.b, r.c, key) for r in self.ranges)

    def dump(self) -> str:
        """One line per range: 'a b c'."""
        return "\n".join(f"{r.a} {r.b} {r.c}" for r in self.ranges)


_INDEXABLE = (INT64, DATE)  # date keys are ordinal-day ints internally


def build_index(rel: PartitionedRelation, col: str, source_table: str = "") -> LearnedIndex:
    """One range per partition from its first/last key on col.

    Requires rel.sorted_on == col and range-disjoint partitions; a key value
    spanning a partition boundary is rejected (the sorted loader prevents it).
    """
    if rel.sorted_on != col:
        raise NotSortedError(f"relation is not sorted on {col!r}")
    if rel.schema.type_of(col) not in _INDEXABLE:
        raise TypeMismatchError(f"column {col!r} is not an integer-keyed column")
    idx = rel.schema.index_of(col)
    ranges: list[PartitionRange] = []
    for part in rel.partitions:
        if not part.rows:
            continue
        a = part.rows[0][idx]
        b = part.rows[-1][idx]
        if b < a:
            raise NotSortedError(f"partition {part.ordinal} not sorted on {col!r}")
        ranges.append(PartitionRange(a=a, b=b, c=part.ordinal))
    for prev, cur in zip(ranges, ranges[1:]):
        if cur.a <= prev.b:
            raise OverlappingPartitionsError(
                f"partitions {prev.c} and {cur.c} overlap on key {cur.a}"
            )
    return LearnedIndex(ranges=tuple(ranges), source=(source_table, col))


def probe(idx: LearnedIndex, key: int, counter: list | None = None) -> int:
    """Partition ordinal containing key, or 0.

    Binary search over range starts; equals probe_sum everywhere. When
    counter (a single-cell list) is given, each range comparison increments
    it, which tests use to pin the log2(n)+1 bound.
    """
    ranges = idx.ranges
    lo, hi = 0, len(ranges)
    # find rightmost range with a <= key
    while lo < hi:
        mid = (lo + hi) // 2
        if counter is not None:
            counter[0] += 1
        if ranges[mid].a <= key:
            lo = mid + 1
        else:
            hi = mid
    if lo == 0:
        return 0
    r = ranges[lo - 1]
    if counter is not None:
        counter[0] += 1
    return r.c if key <= r.b else 0


def annotate_partitions(
    idx: LearnedIndex, rel: PartitionedRelation, col: str
) -> PartitionedRelation:
    """Append a 'Partition' column holding probe(idx, row[col]) to every row.

    Each partition of rel is annotated independently (parallelizable); the
    executor runs one task per partition.
    """
    out_parts = [annotate_one(idx, p, rel.schema, col) for p in rel.partitions]
    return PartitionedRelation(
        schema=annotated_schema(rel.schema), partitions=out_parts, sorted_on=rel.sorted_on
    )


def annotated_schema(schema: Schema) -> Schema:
    return Schema(schema.columns + (("Partition", INT64),))


def annotate_one(idx: LearnedIndex, part: Partition, schema: Schema, col: str) -> Partition:
    """Annotate a single partition (the per-task unit)."""
    if schema.type_of(col) not in _INDEXABLE:
        raise TypeMismatchError(
            f"column {col!r} of type {schema.type_of(col)} cannot probe an integer index"
        )
    ci = schema.index_of(col)
    rows = [row + (probe(idx, row[ci]),) for row in part.rows]
    return Partition(rows=rows, ordinal=part.ordinal)


def indexed_join(
    a: PartitionedRelation,
    b: PartitionedRelation,
    col_a: str,
    col_b: str,
    source_table: str = "",
) -> PartitionedRelation:
    """Inner equi-join using the learned index of a (sorted on col_a).

    Procedure: build the index on a, annotate b, then for each ordinal i of a
    join the b-tuples whose Partition column equals i against partition i
    only. Tuples annotated 0 produce no output. Output columns are b's
    followed by a's; row order is b-major within each ordinal group.

    This is the one-call form; the executor splits the same steps into
    parallel annotate / select / per-partition join tasks.
    """
    idx = build_index(a, col_a, source_table)
    annotated = annotate_partitions(idx, b, col_b)
    pcol = annotated.schema.index_of("Partition")
    groups: dict[int, list] = {}
    for part in annotated.partitions:
        for row in part.rows:
            ordinal = row[pcol]
            if ordinal != 0:
                groups.setdefault(ordinal, []).append(row[:-1])
    out_schema = b.schema.concat(a.schema)
    bi = b.schema.index_of(col_b)
    out_rows: list[tuple] = []
    for ordinal in sorted(groups):
        a_part = a.partitions[ordinal - 1]
        out_rows.extend(join_partition(a_part, a.schema, col_a, groups[ordinal], bi))
    from .relation import split_rows

    return split_rows(out_schema, out_rows, max(1, max(len(p) for p in a.partitions) if a.partitions else 1))


def join_partition(
    a_part: Partition, a_schema: Schema, col_a: str, b_rows: list, b_key_idx: int
) -> list[tuple]:
    """Join selected b rows against one partition of a (build side)."""
    ai = a_schema.index_of(col_a)
    by_key: dict = {}
    for row in a_part.rows:
        by_key.setdefault(row[ai], []).append(row)
    out = []
    for brow in b_rows:
        for arow in by_key.get(brow[b_key_idx], ()):
            out.append(brow + arow)
    return out
