import os

import pytest

from rawdb import Engine, EngineConfig, tpch
from rawdb.bench import register_bench_udfs


@pytest.fixture(scope="session")
def tpch_tiny_dir(tmp_path_factory):
    """SF 0.003 TPC-H files shared across the whole run."""
    d = tmp_path_factory.mktemp("tpch_tiny")
    tpch.generate(str(d), sf=0.003, seed=7)
    return str(d)


@pytest.fixture()
def tiny_engine(tpch_tiny_dir):
    engine = Engine(EngineConfig(workers=4, partition_size=500))
    tpch.register_all(engine, tpch_tiny_dir)
    register_bench_udfs(engine)
    return engine


@pytest.fixture()
def write_file(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return _write
