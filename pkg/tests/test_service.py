import warnings

import pytest

from rawdb import Engine, EngineConfig, tpch
from rawdb.bench import register_bench_udfs
from rawdb.service import create_app

with warnings.catch_warnings():
    warnings.simplefilter("ignore", DeprecationWarning)
    from fastapi.testclient import TestClient


@pytest.fixture()
def client(tpch_tiny_dir):
    engine = Engine(EngineConfig(workers=2, partition_size=500))
    tpch.register_all(engine, tpch_tiny_dir)
    register_bench_udfs(engine)
    return TestClient(create_app(engine))


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json()["tables"] == 6


def test_list_tables(client):
    body = client.get("/tables").json()
    names = {t["name"] for t in body["tables"]}
    assert names == set(tpch.SCHEMAS)
    lineitem = next(t for t in body["tables"] if t["name"] == "lineitem")
    assert lineitem["sort_by"] == "l_orderkey"
    assert len(lineitem["columns"]) == 16


def test_register_table_endpoint(client, tmp_path):
    p = tmp_path / "extra.csv"
    p.write_text("k,v\n1,2\n3,4\n")
    resp = client.post("/tables", json={"name": "extra", "path": str(p), "format": "csv"})
    assert resp.status_code == 200
    assert resp.json()["columns"] == ["k", "v"]
    resp = client.post("/query", json={"sql": "select k from extra where v > 2"})
    assert resp.json()["rows"] == [[3]]


def test_register_missing_file_404(client):
    resp = client.post("/tables", json={"name": "x", "path": "/nope/missing.csv"})
    assert resp.status_code == 404
    assert resp.json()["detail"]["error"] == "FileNotFound"


def test_query_endpoint_json_rows(client):
    resp = client.post("/query", json={"sql": "select o_orderkey, o_orderdate from orders limit 2"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["row_count"] == 2
    assert body["columns"] == ["o_orderkey", "o_orderdate"]
    # dates serialized as ISO strings
    assert all(isinstance(r[1], str) and r[1].count("-") == 2 for r in body["rows"])
    assert body["stats"]["rows"] == 2


def test_query_syntax_error_400_with_position(client):
    resp = client.post("/query", json={"sql": "select from"})
    assert resp.status_code == 400
    detail = resp.json()["detail"]
    assert detail["error"] == "SqlSyntaxError"
    assert isinstance(detail["position"], int)


def test_query_unknown_table_400(client):
    resp = client.post("/query", json={"sql": "select a from nope"})
    assert resp.status_code == 400
    assert resp.json()["detail"]["error"] == "UnknownTableError"


def test_explain_endpoint(client):
    resp = client.post("/explain", json={"sql": tpch.FIG3_QUERY})
    assert resp.status_code == 200
    assert "read_table(lineitem)" in resp.json()["plan"]


def test_datagen_endpoint(client, tmp_path):
    out = tmp_path / "keys.csv"
    resp = client.post("/datagen", json={
        "distribution": "rseq", "r": 8, "c": 4, "out": str(out), "format": "csv",
    })
    assert resp.status_code == 200
    assert resp.json()["records"] == 8
    assert out.read_text().splitlines()[1:] == [
        "1,1", "1,1", "2,2", "2,2", "3,3", "3,3", "4,4", "4,4",
    ]


def test_datagen_invalid_spec_400(client, tmp_path):
    resp = client.post("/datagen", json={
        "distribution": "rseq", "r": 10, "c": 4, "out": str(tmp_path / "x.csv"),
    })
    assert resp.status_code == 400
    assert resp.json()["detail"]["error"] == "IndivisibleSizeError"


def test_bench_endpoint(client, tmp_path):
    resp = client.post("/bench", json={
        "suite": "udf", "sf": 0.001, "workers": 2, "verify": True,
        "data_dir": str(tmp_path / "bench_data"),
    })
    assert resp.status_code == 200
    body = resp.json()
    assert {e["name"] for e in body["entries"]} == {"LR", "K-Means", "Quantiles", "CGO"}
    assert all(e["verified"] == "ok" for e in body["entries"])
    assert "query=LR" in body["report_text"]


def test_udf_query_over_service(client):
    resp = client.post("/query", json={
        "sql": "select myQuantile(l_discount) from lineitem limit 50",
    })
    assert resp.status_code == 200
    body = resp.json()
    assert body["columns"] == ["q", "value"]
    assert body["row_count"] == 5
