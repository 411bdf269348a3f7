"""Query engine facade: catalog + frontend + planner + executor.

One Engine owns a catalog (with its persistence cache), a UDF registry, and
the learned indexes of tables that were registered with a sort column. A
query runs through parse -> bind -> logical -> physical -> engine plan ->
task graph -> worker pool; the worker count can vary per call, the cached
ingested relations are reused across calls.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .catalog import Catalog, PersistKey, load_catalog_config, load_engine_config
from .errors import NotSortedError, OverlappingPartitionsError, TypeMismatchError
from .executor import ExecutionTrace, WorkerPool, compile_tasks, execute
from .frontend import bind, parse
from .learned_index import LearnedIndex, build_index
from .planner import build_logical_plan, convert_to_engine_plan, render_explain, to_physical
from .relation import DATE, INT64, PartitionedRelation, Schema, format_value
from .udf import UdfRegistry

DEFAULT_PARTITION_SIZE = 8192


@dataclass
class EngineConfig:
    workers: int = 4
    partition_size: int = DEFAULT_PARTITION_SIZE
    aggregation_strategy: str = "partition_and_aggregate"
    persistence: bool = True


@dataclass
class QueryStats:
    wall_ms: float = 0.0
    rows: int = 0
    bytes_transferred: int = 0
    partitions_pruned: int = 0
    partitions_touched: int = 0
    ingested_files: int = 0


@dataclass
class QueryResult:
    columns: list[str]
    types: list[str]
    rows: list[tuple]
    stats: QueryStats = field(default_factory=QueryStats)
    trace: ExecutionTrace | None = None

    def formatted_rows(self) -> list[list[str]]:
        return [
            [format_value(v, t) for v, t in zip(row, self.types)]
            for row in self.rows
        ]


class Engine:
    def __init__(self, config: EngineConfig | None = None):
        self.config = config or EngineConfig()
        self.catalog = Catalog()
        self.udfs = UdfRegistry()
        self._indexes: dict[tuple[str, str], LearnedIndex | None] = {}

    # -- registration --

    def register_table(self, name, path, fmt="csv", schema=None, sort_by=None, header=None):
        return self.catalog.register_table(
            name, path, fmt, schema=schema, sort_by=sort_by, header=header
        )

    def load_catalog_file(self, path: str) -> None:
        for entry in load_catalog_config(path):
            self.register_table(
                entry["name"],
                entry["path"],
                entry.get("format", "csv"),
                schema=entry.get("schema"),
                sort_by=entry.get("sort_by"),
                header=entry.get("header"),
            )
        engine_opts = load_engine_config(path)
        if "workers" in engine_opts:
            self.config.workers = int(engine_opts["workers"])
        if "partition_size" in engine_opts:
            self.config.partition_size = int(engine_opts["partition_size"])
        if "aggregation.strategy" in engine_opts:
            self.config.aggregation_strategy = engine_opts["aggregation.strategy"]

    def register_udf(self, fn, arg_column_counts, name=None):
        """Register a callable; the paper-style two-argument form uses the
        function's own name."""
        self.udfs.register(name or fn.__name__, fn, list(arg_column_counts))

    def load_udf_script(self, path: str) -> None:
        """Execute a user script that calls register_udf(fn, counts)."""
        with open(path) as f:
            source = f.read()
        namespace = {"register_udf": self.register_udf, "__name__": "__udf_script__"}
        exec(compile(source, path, "exec"), namespace)

    # -- ingestion and indexes --

    def relation(self, table: str) -> PartitionedRelation:
        """Partitioned (and, when declared, sorted) table contents.

        With persistence on, the file is parsed once and reused by every
        later query; lookups are keyed on (table, transform, sort column).
        """
        handle = self.catalog.table(table)
        psize = self.config.partition_size
        transform = f"partitioned:{psize}"
        key = PersistKey.for_relation(table, transform, handle.sort_by)
        cached = self.catalog.lookup_persisted(key)
        if cached is not None:
            return cached
        if handle.sort_by:
            rel = self.catalog.load_sorted(handle, psize, handle.sort_by)
        else:
            rel = self.catalog.load_partitions(handle, psize)
        if self.config.persistence:
            self.catalog.persist(rel, key)
        return rel

    def index_for(self, table: str) -> LearnedIndex | None:
        handle = self.catalog.table(table)
        col = handle.sort_by
        if col is None or handle.schema.type_of(col) not in (INT64, DATE):
            return None
        cache_key = (table, col)
        if cache_key not in self._indexes:
            try:
                self._indexes[cache_key] = build_index(self.relation(table), col, table)
            except (NotSortedError, OverlappingPartitionsError, TypeMismatchError):
                self._indexes[cache_key] = None
        return self._indexes[cache_key]

    # -- planning --

    def plan(self, sql_text: str):
        parsed, _ = parse(sql_text)
        bound = bind(parsed, self.catalog, self.udfs)
        lp = build_logical_plan(bound)
        sorted_tables = {}
        for t in parsed.from_tables:
            handle = self.catalog.table(t)
            if handle.sort_by and self.index_for(t) is not None:
                sorted_tables[t] = handle.sort_by
        pp = to_physical(lp, bound.table_schemas, sorted_tables)
        return bound, convert_to_engine_plan(pp)

    def explain(self, sql_text: str) -> str:
        _, ep = self.plan(sql_text)
        return render_explain(ep)

    # -- execution --

    def sql(self, sql_text: str, workers: int | None = None, strategy: str | None = None) -> QueryResult:
        t0 = time.perf_counter()
        ingest_before = self.catalog.ingest_count
        bound, ep = self.plan(sql_text)
        relations = {t: self.relation(t) for t in bound.parsed.from_tables}
        indexes = {}
        for t in bound.parsed.from_tables:
            idx = self.index_for(t)
            if idx is not None:
                indexes[(t, self.catalog.table(t).sort_by)] = idx
        compiled = compile_tasks(
            ep,
            relations,
            indexes,
            udf_registry=self.udfs,
            agg_strategy=strategy or self.config.aggregation_strategy,
            agg_threads=workers or self.config.workers,
        )
        pool = WorkerPool(workers or self.config.workers)
        trace = ExecutionTrace()
        outputs = execute(compiled.graph, pool, trace)

        if compiled.udf_result:
            rows, layout = outputs[compiled.result_refs[0]]
            columns = [n for n, _ in layout]
            types = [t for _, t in layout]
        else:
            rows = [r for ref in compiled.result_refs for r in outputs[ref]]
            columns = [n for n, _ in compiled.result_layout]
            types = [t for _, t in compiled.result_layout]

        stats = QueryStats(
            wall_ms=(time.perf_counter() - t0) * 1000.0,
            rows=len(rows),
            bytes_transferred=pool.total_transferred,
            partitions_pruned=compiled.partitions_pruned,
            partitions_touched=compiled.partitions_touched,
            ingested_files=self.catalog.ingest_count - ingest_before,
        )
        return QueryResult(columns=columns, types=types, rows=rows, stats=stats, trace=trace)

    # -- oracle support --

    def reference_tables(self, table_names) -> dict[str, tuple[Schema, list]]:
        """Canonical table contents for the reference evaluator.

        Tables registered with a sort column are sorted here too: sortedness
        is part of the declared table contract, not an execution detail.
        """
        out = {}
        for t in table_names:
            handle = self.catalog.table(t)
            rows = self.catalog.read_rows(handle)
            if handle.sort_by:
                i = handle.schema.index_of(handle.sort_by)
                rows.sort(key=lambda r: r[i])
            out[t] = (handle.schema, rows)
        return out

    def reference_sql(self, sql_text: str) -> QueryResult:
        """Evaluate through the naive single-threaded oracle path."""
        from .reference import reference_evaluate

        parsed, _ = parse(sql_text)
        bound = bind(parsed, self.catalog, self.udfs)
        bound.udf_registry = self.udfs
        tables = self.reference_tables(parsed.from_tables)
        columns, types, rows = reference_evaluate(bound, tables)
        return QueryResult(
            columns=columns, types=types, rows=rows,
            stats=QueryStats(rows=len(rows)),
        )
