import os

import pytest
from click.testing import CliRunner

from rawdb import tpch
from rawdb.cli import main


@pytest.fixture(scope="module")
def catalog_file(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli_data")
    tpch.generate(str(d), sf=0.003, seed=7)
    cfg = str(d / "tables.cfg")
    tpch.write_catalog_config(str(d), cfg)
    return cfg


@pytest.fixture()
def runner():
    return CliRunner()


def test_query_subcommand(runner, catalog_file):
    result = runner.invoke(main, [
        "--catalog", catalog_file, "query",
        "select l_orderkey, l_quantity from lineitem where l_orderkey < 3",
    ])
    assert result.exit_code == 0
    assert "l_orderkey" in result.output
    assert "rows)" in result.output


def test_fig3_query_limit5(runner, catalog_file):
    result = runner.invoke(main, ["--catalog", catalog_file, "query", tpch.FIG3_QUERY])
    assert result.exit_code == 0
    assert "(5 rows)" in result.output


def test_malformed_sql_exits_2(runner, catalog_file):
    result = runner.invoke(main, ["--catalog", catalog_file, "query", "select from"])
    assert result.exit_code == 2
    assert "SqlSyntaxError" in result.stderr


def test_explain_prefix_inside_query(runner, catalog_file):
    result = runner.invoke(main, [
        "--catalog", catalog_file, "query", f"explain {tpch.FIG3_QUERY}",
    ])
    assert result.exit_code == 0
    assert "merge_join" in result.output


def test_explain_subcommand(runner, catalog_file):
    result = runner.invoke(main, ["--catalog", catalog_file, "explain", tpch.FIG3_QUERY])
    assert result.exit_code == 0
    assert "read_table(lineitem)" in result.output


def test_repl_survives_errors(runner, catalog_file):
    result = runner.invoke(
        main,
        ["--catalog", catalog_file, "repl"],
        input="select bogus from lineitem\nselect l_orderkey from lineitem limit 1\n\\q\n",
    )
    assert result.exit_code == 0
    assert "UnknownColumnError" in result.stderr
    assert "(1 rows)" in result.output


def test_datagen_subcommand(runner, tmp_path):
    out = str(tmp_path / "z.tbl")
    result = runner.invoke(main, [
        "datagen", "--dist", "zipf", "--r", "100", "--c", "8",
        "--seed", "5", "--out", out, "--format", "tbl",
    ])
    assert result.exit_code == 0
    assert os.path.isfile(out)
    assert len(open(out).readlines()) == 100


def test_datagen_rejects_bad_spec(runner, tmp_path):
    result = runner.invoke(main, [
        "datagen", "--dist", "rseq", "--r", "10", "--c", "4",
        "--out", str(tmp_path / "x.csv"),
    ])
    assert result.exit_code == 2


def test_bench_subcommand_with_verify(runner, tmp_path):
    out = str(tmp_path / "report.txt")
    result = runner.invoke(main, [
        "bench", "--suite", "udf", "--sf", "0.001", "--workers", "2",
        "--verify", "--data-dir", str(tmp_path / "data"), "--out", out,
    ])
    assert result.exit_code == 0, result.output
    assert "query=LR" in result.output
    assert "verified=ok" in result.output
    assert os.path.isfile(out)


def test_udf_script_loading(runner, catalog_file, tmp_path):
    script = tmp_path / "udfs.py"
    script.write_text(
        "def rowCount(df):\n"
        "    return len(df)\n"
        "register_udf(rowCount, [1])\n"
    )
    result = runner.invoke(main, [
        "--catalog", catalog_file, "--udf-script", str(script),
        "query", "select rowCount(l_tax) from lineitem limit 9",
    ])
    assert result.exit_code == 0
    assert "9" in result.output
