"""Command-line client: repl | query | explain | datagen | bench | serve.

The CLI always talks HTTP to the query service. With --server it targets a
running instance; without it, it builds an Engine from the local flags and
drives an in-process app through an ASGI test transport, so one-shot use
needs no daemon. `serve` starts the service under uvicorn.

Exit codes: 0 success, 2 for any query/frontend/planner/executor error.
"""

from __future__ import annotations

import sys

import click
import httpx

from .engine import Engine, EngineConfig
from .service import create_app


def _local_client(catalog, workers, partition_size, strategy, udf_script) -> httpx.Client:
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DeprecationWarning)
        from fastapi.testclient import TestClient

    config = EngineConfig(workers=workers, partition_size=partition_size)
    if strategy:
        config.aggregation_strategy = strategy
    engine = Engine(config)
    if catalog:
        engine.load_catalog_file(catalog)
    if udf_script:
        engine.load_udf_script(udf_script)
    return TestClient(create_app(engine))


def _client(ctx) -> httpx.Client:
    opts = ctx.obj
    if opts["server"]:
        return httpx.Client(base_url=opts["server"], timeout=600.0)
    return _local_client(
        opts["catalog"], opts["workers"], opts["partition_size"],
        opts["strategy"], opts["udf_script"],
    )


def _fail(response) -> None:
    try:
        detail = response.json()["detail"]
        message = f"{detail.get('error', 'Error')}: {detail.get('message', '')}"
    except Exception:
        message = response.text
    click.echo(message, err=True)
    sys.exit(2)


def _print_table(columns, rows) -> None:
    if not rows:
        click.echo(" | ".join(columns))
        click.echo("(0 rows)")
        return
    cells = [[str(v) for v in row] for row in rows]
    widths = [
        max(len(columns[i]), max(len(r[i]) for r in cells))
        for i in range(len(columns))
    ]
    click.echo(" | ".join(c.ljust(w) for c, w in zip(columns, widths)))
    click.echo("-+-".join("-" * w for w in widths))
    for r in cells:
        click.echo(" | ".join(c.ljust(w) for c, w in zip(r, widths)))
    click.echo(f"({len(rows)} rows)")


@click.group()
@click.option("--server", default=None, help="URL of a running rawdb service; omit to run in-process.")
@click.option("--catalog", default=None, type=click.Path(), help="Catalog config file (in-process mode).")
@click.option("--workers", default=4, show_default=True, type=int)
@click.option("--partition-size", default=8192, show_default=True, type=int)
@click.option("--strategy", default=None, help="Group-by aggregation strategy.")
@click.option("--udf-script", default=None, type=click.Path(), help="Python script calling register_udf(fn, counts).")
@click.pass_context
def main(ctx, server, catalog, workers, partition_size, strategy, udf_script):
    """SQL analytics directly over raw csv/tbl files."""
    ctx.obj = {
        "server": server,
        "catalog": catalog,
        "workers": workers,
        "partition_size": partition_size,
        "strategy": strategy,
        "udf_script": udf_script,
    }


def _run_sql(client, sql_text: str, workers=None, strategy=None) -> None:
    if sql_text.strip().lower().startswith("explain "):
        resp = client.post("/explain", json={"sql": sql_text.strip()[8:]})
        if resp.status_code != 200:
            _fail(resp)
        click.echo(resp.json()["plan"])
        return
    payload = {"sql": sql_text}
    if workers:
        payload["workers"] = workers
    if strategy:
        payload["strategy"] = strategy
    resp = client.post("/query", json=payload)
    if resp.status_code != 200:
        _fail(resp)
    body = resp.json()
    _print_table(body["columns"], body["rows"])


@main.command()
@click.argument("sql")
@click.pass_context
def query(ctx, sql):
    """Run one SQL statement (prefix with 'explain ' for the plan)."""
    with _client(ctx) as client:
        _run_sql(client, sql, ctx.obj["workers"] if ctx.obj["server"] else None,
                 ctx.obj["strategy"] if ctx.obj["server"] else None)


@main.command()
@click.argument("sql")
@click.pass_context
def explain(ctx, sql):
    """Print the engine plan for a SQL statement."""
    with _client(ctx) as client:
        resp = client.post("/explain", json={"sql": sql})
        if resp.status_code != 200:
            _fail(resp)
        click.echo(resp.json()["plan"])


@main.command()
@click.pass_context
def repl(ctx):
    """Interactive SQL loop; \\q quits. Errors never end the session."""
    with _client(ctx) as client:
        click.echo("rawdb repl; end statements with Enter, \\q to quit")
        while True:
            try:
                line = input("sql> ")
            except EOFError:
                break
            line = line.strip()
            if not line:
                continue
            if line in ("\\q", "quit", "exit"):
                break
            try:
                _run_sql(client, line)
            except SystemExit:
                continue  # reported already; keep the loop alive


@main.command()
@click.option("--dist", required=True, type=click.Choice(
    ["rseq", "rseq_shf", "hhit", "hhit_shf", "zipf", "movc"]))
@click.option("--r", "r", required=True, type=int, help="Record count.")
@click.option("--c", "c", required=True, type=int, help="Target group-by cardinality.")
@click.option("--e", "e", default=0.5, show_default=True, type=float, help="Zipf exponent.")
@click.option("--W", "--window", "w", default=64, show_default=True, type=int, help="Moving-cluster window.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path())
@click.option("--format", "fmt", default="csv", show_default=True, type=click.Choice(["csv", "tbl"]))
@click.pass_context
def datagen(ctx, dist, r, c, e, w, seed, out, fmt):
    """Generate a synthetic (key, value) dataset."""
    with _client(ctx) as client:
        resp = client.post("/datagen", json={
            "distribution": dist, "r": r, "c": c, "e": e, "W": w,
            "seed": seed, "out": out, "format": fmt,
        })
        if resp.status_code != 200:
            _fail(resp)
        body = resp.json()
        click.echo(f"wrote {body['records']} records to {body['path']}")


@main.command()
@click.option("--suite", default="tpch", show_default=True, type=click.Choice(["tpch", "udf"]))
@click.option("--sf", default=0.01, show_default=True, type=float)
@click.option("--workers", default=4, show_default=True, type=int)
@click.option("--strategy", default=None)
@click.option("--verify", is_flag=True, help="Cross-check results against the reference evaluator.")
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--out", default=None, type=click.Path(), help="Also write the report to a file.")
@click.pass_context
def bench(ctx, suite, sf, workers, strategy, verify, data_dir, out):
    """Run the TPC-H-subset or UDF suite and print a timing report."""
    with _client(ctx) as client:
        resp = client.post("/bench", json={
            "suite": suite, "sf": sf, "workers": workers,
            "strategy": strategy, "verify": verify, "data_dir": data_dir,
        })
        if resp.status_code != 200:
            _fail(resp)
        text = resp.json()["report_text"]
        click.echo(text)
        if out:
            with open(out, "w") as f:
                f.write(text + "\n")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.pass_context
def serve(ctx, host, port):
    """Start the query service."""
    import uvicorn

    opts = ctx.obj
    config = EngineConfig(workers=opts["workers"], partition_size=opts["partition_size"])
    if opts["strategy"]:
        config.aggregation_strategy = opts["strategy"]
    engine = Engine(config)
    if opts["catalog"]:
        engine.load_catalog_file(opts["catalog"])
    if opts["udf_script"]:
        engine.load_udf_script(opts["udf_script"])
    uvicorn.run(create_app(engine), host=host, port=port)


if __name__ == "__main__":
    main()
