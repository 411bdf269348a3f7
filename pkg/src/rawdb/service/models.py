"""Request/response models for the query service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class QueryRequest(BaseModel):
    sql: str
    workers: int | None = None
    strategy: str | None = None


class QueryStatsModel(BaseModel):
    wall_ms: float = 0.0
    rows: int = 0
    bytes_transferred: int = 0
    partitions_pruned: int = 0
    partitions_touched: int = 0
    ingested_files: int = 0


class QueryResponse(BaseModel):
    columns: list[str]
    types: list[str | None]
    rows: list[list]
    row_count: int
    stats: QueryStatsModel


class ExplainResponse(BaseModel):
    plan: str


class RegisterTableRequest(BaseModel):
    name: str
    path: str
    format: str = "csv"
    sort_by: str | None = None
    header: bool | None = None
    schema_columns: list[str] | None = Field(
        default=None, description="optional explicit schema, entries 'name:type'"
    )


class TableInfo(BaseModel):
    name: str
    path: str
    format: str
    sort_by: str | None
    columns: list[str]
    types: list[str]


class TableListResponse(BaseModel):
    tables: list[TableInfo]


class DatagenRequest(BaseModel):
    distribution: str
    r: int
    c: int
    e: float = 0.5
    W: int = 64
    seed: int = 0
    out: str
    format: str = "csv"


class DatagenResponse(BaseModel):
    path: str
    records: int


class BenchRequest(BaseModel):
    suite: str = "tpch"
    sf: float = 0.01
    workers: int = 4
    strategy: str | None = None
    verify: bool = False
    data_dir: str


class BenchEntryModel(BaseModel):
    name: str
    sf: float
    workers: int
    wall_ms: float
    rows: int
    bytes_transferred: int
    partitions_pruned: int
    verified: str


class BenchResponse(BaseModel):
    entries: list[BenchEntryModel]
    report_text: str


class ErrorResponse(BaseModel):
    error: str
    message: str
    position: int | None = None
