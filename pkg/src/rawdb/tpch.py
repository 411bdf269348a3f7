"""TPC-H-schema tables: column definitions, query texts, and a small
deterministic row generator for desk-scale benchmarking (SF <= 0.1).

Generated files follow dbgen conventions: pipe-delimited ".tbl" without a
header, trailing '|', rows sorted by primary key. Real dbgen output is
accepted as input interchangeably; only the six tables the query subset
touches are generated.

Query texts are the standard forms restricted to the supported grammar:
date arithmetic is pre-evaluated into plain date literals and BETWEEN is
expanded into two comparisons.
"""

from __future__ import annotations

import datetime
import os

import numpy as np

from .relation import DATE, FLOAT64, INT64, STRING, Schema

SCHEMAS: dict[str, Schema] = {
    "region": Schema.of(
        ("r_regionkey", INT64), ("r_name", STRING), ("r_comment", STRING),
    ),
    "nation": Schema.of(
        ("n_nationkey", INT64), ("n_name", STRING), ("n_regionkey", INT64),
        ("n_comment", STRING),
    ),
    "supplier": Schema.of(
        ("s_suppkey", INT64), ("s_name", STRING), ("s_address", STRING),
        ("s_nationkey", INT64), ("s_phone", STRING), ("s_acctbal", FLOAT64),
        ("s_comment", STRING),
    ),
    "customer": Schema.of(
        ("c_custkey", INT64), ("c_name", STRING), ("c_address", STRING),
        ("c_nationkey", INT64), ("c_phone", STRING), ("c_acctbal", FLOAT64),
        ("c_mktsegment", STRING), ("c_comment", STRING),
    ),
    "orders": Schema.of(
        ("o_orderkey", INT64), ("o_custkey", INT64), ("o_orderstatus", STRING),
        ("o_totalprice", FLOAT64), ("o_orderdate", DATE),
        ("o_orderpriority", STRING), ("o_clerk", STRING),
        ("o_shippriority", INT64), ("o_comment", STRING),
    ),
    "lineitem": Schema.of(
        ("l_orderkey", INT64), ("l_partkey", INT64), ("l_suppkey", INT64),
        ("l_linenumber", INT64), ("l_quantity", FLOAT64),
        ("l_extendedprice", FLOAT64), ("l_discount", FLOAT64),
        ("l_tax", FLOAT64), ("l_returnflag", STRING), ("l_linestatus", STRING),
        ("l_shipdate", DATE), ("l_commitdate", DATE), ("l_receiptdate", DATE),
        ("l_shipinstruct", STRING), ("l_shipmode", STRING), ("l_comment", STRING),
    ),
}

SORT_KEYS = {
    "region": "r_regionkey",
    "nation": "n_nationkey",
    "supplier": "s_suppkey",
    "customer": "c_custkey",
    "orders": "o_orderkey",
    "lineitem": "l_orderkey",
}

NATIONS = [
    ("ALGERIA", 0), ("ARGENTINA", 1), ("BRAZIL", 1), ("CANADA", 1),
    ("EGYPT", 4), ("ETHIOPIA", 0), ("FRANCE", 3), ("GERMANY", 3),
    ("INDIA", 2), ("INDONESIA", 2), ("IRAN", 4), ("IRAQ", 4),
    ("JAPAN", 2), ("JORDAN", 4), ("KENYA", 0), ("MOROCCO", 0),
    ("MOZAMBIQUE", 0), ("PERU", 1), ("CHINA", 2), ("ROMANIA", 3),
    ("SAUDI ARABIA", 4), ("VIETNAM", 2), ("RUSSIA", 3),
    ("UNITED KINGDOM", 3), ("UNITED STATES", 1),
]

REGIONS = ["AFRICA", "AMERICA", "ASIA", "EUROPE", "MIDDLE EAST"]

SEGMENTS = ["AUTOMOBILE", "BUILDING", "FURNITURE", "MACHINERY", "HOUSEHOLD"]
PRIORITIES = ["1-URGENT", "2-HIGH", "3-MEDIUM", "4-NOT SPECIFIED", "5-LOW"]
SHIPMODES = ["AIR", "FOB", "MAIL", "RAIL", "REG AIR", "SHIP", "TRUCK"]
INSTRUCTIONS = ["COLLECT COD", "DELIVER IN PERSON", "NONE", "TAKE BACK RETURN"]

_EPOCH = datetime.date(1992, 1, 1).toordinal()
_DATE_SPAN = 2406  # through 1998-08-02

QUERIES = {
    "Q1": """
        SELECT l_returnflag, l_linestatus,
               sum(l_quantity) AS sum_qty,
               sum(l_extendedprice) AS sum_base_price,
               sum(l_extendedprice * (1 - l_discount)) AS sum_disc_price,
               sum(l_extendedprice * (1 - l_discount) * (1 + l_tax)) AS sum_charge,
               avg(l_quantity) AS avg_qty,
               avg(l_extendedprice) AS avg_price,
               avg(l_discount) AS avg_disc,
               count(*) AS count_order
        FROM lineitem
        WHERE l_shipdate <= '1998-09-02'
        GROUP BY l_returnflag, l_linestatus
        ORDER BY l_returnflag, l_linestatus
    """,
    "Q3": """
        SELECT l_orderkey,
               sum(l_extendedprice * (1 - l_discount)) AS revenue,
               o_orderdate, o_shippriority
        FROM customer, orders, lineitem
        WHERE c_mktsegment = 'BUILDING'
          AND c_custkey = o_custkey
          AND l_orderkey = o_orderkey
          AND o_orderdate < '1995-03-15'
          AND l_shipdate > '1995-03-15'
        GROUP BY l_orderkey, o_orderdate, o_shippriority
        ORDER BY revenue DESC, o_orderdate
        LIMIT 10
    """,
    "Q5": """
        SELECT n_name,
               sum(l_extendedprice * (1 - l_discount)) AS revenue
        FROM customer, orders, lineitem, supplier, nation, region
        WHERE c_custkey = o_custkey
          AND l_orderkey = o_orderkey
          AND l_suppkey = s_suppkey
          AND c_nationkey = s_nationkey
          AND s_nationkey = n_nationkey
          AND n_regionkey = r_regionkey
          AND r_name = 'ASIA'
          AND o_orderdate >= '1994-01-01'
          AND o_orderdate < '1995-01-01'
        GROUP BY n_name
        ORDER BY revenue DESC
    """,
    "Q6": """
        SELECT sum(l_extendedprice * l_discount) AS revenue
        FROM lineitem
        WHERE l_shipdate >= '1994-01-01'
          AND l_shipdate < '1995-01-01'
          AND l_discount >= 0.05
          AND l_discount <= 0.07
          AND l_quantity < 24
    """,
    "Q10": """
        SELECT c_custkey, c_name,
               sum(l_extendedprice * (1 - l_discount)) AS revenue,
               c_acctbal, n_name, c_address, c_phone, c_comment
        FROM customer, orders, lineitem, nation
        WHERE c_custkey = o_custkey
          AND l_orderkey = o_orderkey
          AND o_orderdate >= '1993-10-01'
          AND o_orderdate < '1994-01-01'
          AND l_returnflag = 'R'
          AND c_nationkey = n_nationkey
        GROUP BY c_custkey, c_name, c_acctbal, c_phone, n_name, c_address, c_comment
        ORDER BY revenue DESC
        LIMIT 20
    """,
}

# the simplified join query shown with the engine's execution walkthrough
FIG3_QUERY = """SELECT l_orderkey, sum(l_extendedprice *
    (1-l_discount)) as revenue
  FROM orders, lineitem
  WHERE l_orderkey = o_orderkey and o_orderdate >= '1995-01-01'
  GROUP BY l_orderkey
  ORDER BY revenue LIMIT 5 ; """


def _date_strings() -> list[str]:
    # span + max ship delta (121) + max receipt delta (30)
    return [
        datetime.date.fromordinal(_EPOCH + i).isoformat()
        for i in range(_DATE_SPAN + 160)
    ]


def table_counts(sf: float) -> dict[str, int]:
    return {
        "region": 5,
        "nation": 25,
        "supplier": max(1, int(10_000 * sf)),
        "customer": max(1, int(150_000 * sf)),
        "orders": max(1, int(1_500_000 * sf)),
    }


def generate(data_dir: str, sf: float = 0.01, seed: int = 7, force: bool = False) -> dict[str, str]:
    """Write the six .tbl files under data_dir; returns {table: path}.

    Deterministic for a given (sf, seed); existing files are reused unless
    force is set.
    """
    os.makedirs(data_dir, exist_ok=True)
    paths = {t: os.path.join(data_dir, f"{t}.tbl") for t in SCHEMAS}
    if not force and all(os.path.isfile(p) for p in paths.values()):
        return paths

    rng = np.random.default_rng(seed)
    counts = table_counts(sf)
    dates = _date_strings()

    with open(paths["region"], "w") as f:
        for i, name in enumerate(REGIONS):
            f.write(f"{i}|{name}|region {i}|\n")

    with open(paths["nation"], "w") as f:
        for i, (name, region) in enumerate(NATIONS):
            f.write(f"{i}|{name}|{region}|nation {i}|\n")

    n_supp = counts["supplier"]
    s_nation = rng.integers(0, 25, n_supp)
    s_bal = rng.integers(-99999, 999999, n_supp) / 100.0
    with open(paths["supplier"], "w") as f:
        for k in range(1, n_supp + 1):
            f.write(
                f"{k}|Supplier#{k:09d}|addr s{k}|{s_nation[k - 1]}|"
                f"27-{k % 1000:03d}-{k % 10000:04d}|{s_bal[k - 1]:.2f}|supp {k}|\n"
            )

    n_cust = counts["customer"]
    c_nation = rng.integers(0, 25, n_cust)
    c_bal = rng.integers(-99999, 999999, n_cust) / 100.0
    c_seg = rng.integers(0, len(SEGMENTS), n_cust)
    with open(paths["customer"], "w") as f:
        for k in range(1, n_cust + 1):
            f.write(
                f"{k}|Customer#{k:09d}|addr c{k}|{c_nation[k - 1]}|"
                f"15-{k % 1000:03d}-{k % 10000:04d}|{c_bal[k - 1]:.2f}|"
                f"{SEGMENTS[c_seg[k - 1]]}|cust {k}|\n"
            )

    n_ord = counts["orders"]
    o_cust = rng.integers(1, n_cust + 1, n_ord)
    o_date = rng.integers(0, _DATE_SPAN, n_ord)
    o_total = rng.integers(90000, 50000000, n_ord) / 100.0
    o_status = rng.integers(0, 3, n_ord)
    o_prio = rng.integers(0, len(PRIORITIES), n_ord)
    statuses = ["F", "O", "P"]
    with open(paths["orders"], "w") as f:
        for k in range(1, n_ord + 1):
            f.write(
                f"{k}|{o_cust[k - 1]}|{statuses[o_status[k - 1]]}|"
                f"{o_total[k - 1]:.2f}|{dates[o_date[k - 1]]}|"
                f"{PRIORITIES[o_prio[k - 1]]}|Clerk#{k % 1000:09d}|0|order {k}|\n"
            )

    n_lines_per_order = rng.integers(1, 8, n_ord)
    total_lines = int(n_lines_per_order.sum())
    l_supp = rng.integers(1, n_supp + 1, total_lines)
    l_part = rng.integers(1, max(2, int(200_000 * sf)) + 1, total_lines)
    l_qty = rng.integers(1, 51, total_lines)
    l_price = rng.integers(90000, 10000000, total_lines) / 100.0
    l_disc = rng.integers(0, 11, total_lines) / 100.0
    l_tax = rng.integers(0, 9, total_lines) / 100.0
    l_rflag = rng.integers(0, 3, total_lines)
    l_status = rng.integers(0, 2, total_lines)
    l_shipdelta = rng.integers(1, 122, total_lines)
    l_commitdelta = rng.integers(15, 91, total_lines)
    l_receiptdelta = rng.integers(1, 31, total_lines)
    l_mode = rng.integers(0, len(SHIPMODES), total_lines)
    l_instr = rng.integers(0, len(INSTRUCTIONS), total_lines)
    rflags = ["A", "N", "R"]
    lstatuses = ["F", "O"]
    with open(paths["lineitem"], "w") as f:
        li = 0
        for k in range(1, n_ord + 1):
            base = int(o_date[k - 1])
            for ln in range(1, int(n_lines_per_order[k - 1]) + 1):
                ship = base + int(l_shipdelta[li])
                f.write(
                    f"{k}|{l_part[li]}|{l_supp[li]}|{ln}|{l_qty[li]}|"
                    f"{l_price[li]:.2f}|{l_disc[li]:.2f}|{l_tax[li]:.2f}|"
                    f"{rflags[l_rflag[li]]}|{lstatuses[l_status[li]]}|"
                    f"{dates[ship]}|{dates[base + int(l_commitdelta[li])]}|"
                    f"{dates[ship + int(l_receiptdelta[li])]}|"
                    f"{INSTRUCTIONS[l_instr[li]]}|{SHIPMODES[l_mode[li]]}|line {li}|\n"
                )
                li += 1

    return paths


def register_all(engine, data_dir: str) -> None:
    """Register the generated (or dbgen) .tbl files with explicit schemas
    and primary-key sort columns, making every table index-eligible."""
    for table, schema in SCHEMAS.items():
        engine.register_table(
            table,
            os.path.join(data_dir, f"{table}.tbl"),
            "tbl",
            schema=schema,
            sort_by=SORT_KEYS[table],
        )


def write_catalog_config(data_dir: str, path: str) -> None:
    lines = []
    for table, schema in SCHEMAS.items():
        lines.append(f"[{table}]")
        lines.append(f"path = {os.path.join(data_dir, table + '.tbl')}")
        lines.append("format = tbl")
        lines.append(f"sort_by = {SORT_KEYS[table]}")
        cols = ",".join(f"{n}:{t}" for n, t in schema.columns)
        lines.append(f"schema = {cols}")
        lines.append("")
    with open(path, "w") as f:
        f.write("\n".join(lines))
