"""FastAPI service wrapping one Engine instance.

Query errors come back as HTTP 400 with the error class name; missing
files as 404. Result rows are JSON-encoded with dates rendered as ISO
strings (the schema's date columns travel as ints internally).
"""

from __future__ import annotations

import logging

from fastapi import FastAPI, HTTPException

from .. import bench as bench_mod
from .. import datagen as datagen_mod
from ..engine import Engine, QueryResult
from ..errors import RawdbError, SqlSyntaxError
from ..relation import DATE, Schema
from . import models

logger = logging.getLogger(__name__)


def _json_rows(result: QueryResult) -> list[list]:
    date_cols = [i for i, t in enumerate(result.types) if t == DATE]
    if not date_cols:
        return [list(r) for r in result.rows]
    from ..relation import days_to_date

    out = []
    for r in result.rows:
        row = list(r)
        for i in date_cols:
            row[i] = days_to_date(row[i])
        out.append(row)
    return out


def _query_response(result: QueryResult) -> models.QueryResponse:
    return models.QueryResponse(
        columns=result.columns,
        types=result.types,
        rows=_json_rows(result),
        row_count=len(result.rows),
        stats=models.QueryStatsModel(
            wall_ms=result.stats.wall_ms,
            rows=result.stats.rows,
            bytes_transferred=result.stats.bytes_transferred,
            partitions_pruned=result.stats.partitions_pruned,
            partitions_touched=result.stats.partitions_touched,
            ingested_files=result.stats.ingested_files,
        ),
    )


def _http_error(exc: Exception) -> HTTPException:
    if isinstance(exc, FileNotFoundError):
        return HTTPException(status_code=404, detail={
            "error": "FileNotFound", "message": str(exc),
        })
    detail = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, SqlSyntaxError):
        detail["position"] = exc.position
    return HTTPException(status_code=400, detail=detail)


def create_app(engine: Engine | None = None) -> FastAPI:
    engine = engine or Engine()
    app = FastAPI(title="rawdb", version="0.1.0")
    app.state.engine = engine

    @app.get("/health")
    def health():
        return {"status": "ok", "tables": len(engine.catalog.tables())}

    @app.get("/tables", response_model=models.TableListResponse)
    def list_tables():
        infos = [
            models.TableInfo(
                name=h.name, path=h.path, format=h.format, sort_by=h.sort_by,
                columns=h.schema.names, types=[t for _, t in h.schema.columns],
            )
            for h in engine.catalog.tables()
        ]
        return models.TableListResponse(tables=infos)

    @app.post("/tables", response_model=models.TableInfo)
    def register_table(req: models.RegisterTableRequest):
        schema = None
        if req.schema_columns:
            cols = []
            for spec in req.schema_columns:
                name, _, typ = spec.partition(":")
                cols.append((name, typ))
            schema = Schema(tuple(cols))
        try:
            h = engine.register_table(
                req.name, req.path, req.format,
                schema=schema, sort_by=req.sort_by, header=req.header,
            )
        except (RawdbError, FileNotFoundError, ValueError, KeyError) as exc:
            raise _http_error(exc)
        return models.TableInfo(
            name=h.name, path=h.path, format=h.format, sort_by=h.sort_by,
            columns=h.schema.names, types=[t for _, t in h.schema.columns],
        )

    @app.post("/query", response_model=models.QueryResponse)
    def query(req: models.QueryRequest):
        try:
            result = engine.sql(req.sql, workers=req.workers, strategy=req.strategy)
        except (RawdbError, FileNotFoundError) as exc:
            raise _http_error(exc)
        return _query_response(result)

    @app.post("/explain", response_model=models.ExplainResponse)
    def explain(req: models.QueryRequest):
        try:
            plan = engine.explain(req.sql)
        except (RawdbError, FileNotFoundError) as exc:
            raise _http_error(exc)
        return models.ExplainResponse(plan=plan)

    @app.post("/datagen", response_model=models.DatagenResponse)
    def generate_dataset(req: models.DatagenRequest):
        try:
            spec = datagen_mod.DatasetSpec(
                distribution=req.distribution, r=req.r, c=req.c,
                e=req.e, W=req.W, seed=req.seed,
            )
            keys = datagen_mod.generate(spec)
            datagen_mod.write_dataset(keys, req.out, fmt=req.format)
        except (RawdbError, ValueError, OSError) as exc:
            raise _http_error(exc)
        return models.DatagenResponse(path=req.out, records=len(keys))

    @app.post("/bench", response_model=models.BenchResponse)
    def run_bench(req: models.BenchRequest):
        try:
            report = bench_mod.run_bench(
                req.data_dir, suite=req.suite, sf=req.sf, workers=req.workers,
                strategy=req.strategy, verify=req.verify,
            )
        except (RawdbError, ValueError, OSError) as exc:
            raise _http_error(exc)
        entries = [
            models.BenchEntryModel(
                name=e.name, sf=e.sf, workers=e.workers, wall_ms=e.wall_ms,
                rows=e.rows, bytes_transferred=e.bytes_transferred,
                partitions_pruned=e.partitions_pruned, verified=e.verified,
            )
            for e in report.entries
        ]
        return models.BenchResponse(entries=entries, report_text=report.to_text())

    return app
