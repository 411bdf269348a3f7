"""Benchmark harness: the TPC-H query subset and the UDF task suite.

The four UDF tasks keep their original query shapes; the callables behind
them are deterministic equivalents (closed-form least squares, fixed-init
k-means inertia, exact quantiles, fixed-iteration conjugate gradient) so a
run can be verified bit-for-bit against the reference evaluator.

Reports are line-oriented text: one line per query with wall time, row
count, executor transfer bytes, and partitions pruned. Timing is reported,
never asserted; correctness comes from --verify.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from . import tpch
from .engine import Engine, EngineConfig, QueryResult
from .errors import VerificationFailedError
from .relation import FLOAT64, INT64
from .udf import ColumnFrame

UDF_QUERIES = {
    "LR": "select myLinearFit(l_discount, l_tax) from lineitem "
          "where l_orderkey < 10 limit 50",
    "K-Means": "select myKMeans(l_discount, l_tax) from lineitem, orders "
               "where l_orderkey = o_orderkey limit 50",
    "Quantiles": "select myQuantile(l_discount) from lineitem, orders "
                 "where l_orderkey = o_orderkey limit 50",
    "CGO": "select myCGO(l_discount, l_tax) from lineitem "
           "where l_orderkey < 10 limit 1",
}


# --- deterministic UDF stand-ins ---


def my_linear_fit(df: ColumnFrame):
    """Closed-form least squares y = a + b*x over the two frame columns."""
    cols = df.columns
    xs, ys = df[cols[0]], df[cols[1]]
    n = len(xs)
    if n == 0:
        return {"intercept": [0.0], "slope": [0.0]}
    mx = sum(xs) / n
    my = sum(ys) / n
    var = sum((x - mx) ** 2 for x in xs)
    if var == 0.0:
        return {"intercept": [my], "slope": [0.0]}
    slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / var
    return {"intercept": [my - slope * mx], "slope": [slope]}


def my_kmeans(df: ColumnFrame):
    """Lloyd's iterations from first-k-distinct-point centers; returns the
    final inertia, so the result is a pure function of the frame."""
    cols = df.columns
    points = list(zip(df[cols[0]], df[cols[1]]))
    if not points:
        return 0.0
    centers: list[tuple] = []
    for p in points:
        if p not in centers:
            centers.append(p)
        if len(centers) == 4:
            break
    for _ in range(10):
        buckets: list[list[tuple]] = [[] for _ in centers]
        for p in points:
            best = min(
                range(len(centers)),
                key=lambda i: (p[0] - centers[i][0]) ** 2 + (p[1] - centers[i][1]) ** 2,
            )
            buckets[best].append(p)
        centers = [
            (sum(q[0] for q in b) / len(b), sum(q[1] for q in b) / len(b))
            if b else c
            for b, c in zip(buckets, centers)
        ]
    inertia = 0.0
    for p in points:
        inertia += min(
            (p[0] - c[0]) ** 2 + (p[1] - c[1]) ** 2 for c in centers
        )
    return inertia


def my_quantile(df: ColumnFrame):
    """Exact quantiles (linear interpolation) of the single column."""
    col = sorted(df[df.columns[0]])
    qs = [0.0, 0.25, 0.5, 0.75, 1.0]
    if not col:
        return {"q": qs, "value": [0.0] * len(qs)}
    values = []
    for q in qs:
        pos = q * (len(col) - 1)
        lo = int(math.floor(pos))
        hi = int(math.ceil(pos))
        frac = pos - lo
        values.append(col[lo] * (1 - frac) + col[hi] * frac)
    return {"q": qs, "value": values}


def my_cgo(df: ColumnFrame):
    """Three conjugate-gradient iterations on A = M^T M + I, b = ones;
    returns the residual norm."""
    cols = df.columns
    m = list(zip(df[cols[0]], df[cols[1]]))
    a = [[1.0, 0.0], [0.0, 1.0]]
    for x, y in m:
        a[0][0] += x * x
        a[0][1] += x * y
        a[1][0] += x * y
        a[1][1] += y * y

    def matvec(v):
        return [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]

    x = [0.0, 0.0]
    r = [1.0, 1.0]
    p = list(r)
    rs = r[0] * r[0] + r[1] * r[1]
    for _ in range(3):
        if rs == 0.0:
            break
        ap = matvec(p)
        denom = p[0] * ap[0] + p[1] * ap[1]
        alpha = rs / denom
        x = [x[0] + alpha * p[0], x[1] + alpha * p[1]]
        r = [r[0] - alpha * ap[0], r[1] - alpha * ap[1]]
        rs_new = r[0] * r[0] + r[1] * r[1]
        p = [r[0] + (rs_new / rs) * p[0], r[1] + (rs_new / rs) * p[1]]
        rs = rs_new
    return math.sqrt(rs)


BENCH_UDFS = [
    ("myLinearFit", my_linear_fit, [2]),
    ("myKMeans", my_kmeans, [2]),
    ("myQuantile", my_quantile, [1]),
    ("myCGO", my_cgo, [2]),
]


def register_bench_udfs(engine: Engine) -> None:
    for name, fn, counts in BENCH_UDFS:
        engine.register_udf(fn, counts, name=name)


@dataclass
class BenchEntry:
    name: str
    sf: float
    workers: int
    wall_ms: float
    rows: int
    bytes_transferred: int
    partitions_pruned: int
    verified: str = "skipped"  # skipped | ok

    def to_line(self) -> str:
        return (
            f"query={self.name} sf={self.sf} workers={self.workers} "
            f"wall_ms={self.wall_ms:.1f} rows={self.rows} "
            f"bytes_transferred={self.bytes_transferred} "
            f"partitions_pruned={self.partitions_pruned} verified={self.verified}"
        )


@dataclass
class BenchReport:
    entries: list[BenchEntry] = field(default_factory=list)

    def to_text(self) -> str:
        return "\n".join(e.to_line() for e in self.entries)


def rows_match(result: QueryResult, reference: QueryResult, rel_tol: float = 1e-9):
    """Multiset comparison: exact for ints/dates/strings, rel_tol for floats.

    Returns None on match, else a description of the first difference.
    """
    if result.columns != reference.columns:
        return f"columns {result.columns} != {reference.columns}"
    if len(result.rows) != len(reference.rows):
        return f"row count {len(result.rows)} != {len(reference.rows)}"
    is_float = [t == FLOAT64 for t in result.types]

    def sort_key(row):
        return tuple(
            round(v, 2) if f and isinstance(v, float) else v
            for v, f in zip(row, is_float)
        )

    got = sorted(result.rows, key=sort_key)
    want = sorted(reference.rows, key=sort_key)
    for g, w in zip(got, want):
        for gv, wv, f in zip(g, w, is_float):
            if f:
                if not math.isclose(gv, wv, rel_tol=rel_tol, abs_tol=1e-12):
                    return f"value {gv!r} != {wv!r} in row {g!r}"
            elif gv != wv:
                return f"value {gv!r} != {wv!r} in row {g!r}"
    return None


def bench_engine(data_dir: str, sf: float, workers: int, strategy: str | None = None,
                 partition_size: int = 8192, seed: int = 7) -> Engine:
    """Engine over freshly generated (or cached) TPC-H files at sf."""
    tpch.generate(data_dir, sf=sf, seed=seed)
    config = EngineConfig(workers=workers, partition_size=partition_size)
    if strategy:
        config.aggregation_strategy = strategy
    engine = Engine(config)
    tpch.register_all(engine, data_dir)
    register_bench_udfs(engine)
    return engine


def run_bench(
    data_dir: str,
    suite: str = "tpch",
    sf: float = 0.01,
    workers: int = 4,
    strategy: str | None = None,
    verify: bool = False,
    partition_size: int = 8192,
    engine: Engine | None = None,
) -> BenchReport:
    """Run the tpch or udf suite; verify cross-checks every query against
    the reference evaluator and raises VerificationFailedError on mismatch."""
    if suite not in ("tpch", "udf"):
        raise ValueError(f"unknown suite {suite!r}")
    if engine is None:
        engine = bench_engine(data_dir, sf, workers, strategy, partition_size)
    queries = tpch.QUERIES if suite == "tpch" else UDF_QUERIES
    report = BenchReport()
    for name, sql_text in queries.items():
        t0 = time.perf_counter()
        result = engine.sql(sql_text, workers=workers, strategy=strategy)
        wall_ms = (time.perf_counter() - t0) * 1000.0
        entry = BenchEntry(
            name=name, sf=sf, workers=workers, wall_ms=wall_ms,
            rows=result.stats.rows,
            bytes_transferred=result.stats.bytes_transferred,
            partitions_pruned=result.stats.partitions_pruned,
        )
        if verify:
            reference = engine.reference_sql(sql_text)
            problem = rows_match(result, reference)
            if problem is not None:
                raise VerificationFailedError(name, problem)
            entry.verified = "ok"
        report.entries.append(entry)
    return report
