"""Seeded random queries over the TPC-H mini-catalog, used to cross-check
the engine against the reference evaluator and to fuzz the planner."""

import random

LINEITEM_NUM = ["l_quantity", "l_extendedprice", "l_discount", "l_tax"]
LINEITEM_GROUP = ["l_returnflag", "l_linestatus", "l_suppkey"]
ORDERS_NUM = ["o_totalprice", "o_custkey"]
ORDERS_GROUP = ["o_orderstatus", "o_orderpriority"]

AGGS = ["sum", "avg", "min", "max", "count"]
OPS = ["=", "<", "<=", ">", ">=", "<>"]


def _pred(rng: random.Random, table: str) -> str:
    if table == "lineitem":
        kind = rng.choice(["qty", "disc", "key", "date", "flag"])
        if kind == "qty":
            return f"l_quantity {rng.choice(OPS)} {rng.randint(1, 50)}"
        if kind == "disc":
            return f"l_discount {rng.choice(['<', '<=', '>', '>='])} 0.0{rng.randint(1, 9)}"
        if kind == "key":
            return f"l_orderkey {rng.choice(['<', '<=', '>', '>='])} {rng.randint(1, 4000)}"
        if kind == "date":
            return f"l_shipdate {rng.choice(['<', '>='])} '199{rng.randint(2, 8)}-0{rng.randint(1, 9)}-15'"
        return f"l_returnflag = '{rng.choice(['A', 'N', 'R'])}'"
    kind = rng.choice(["price", "date", "key"])
    if kind == "price":
        return f"o_totalprice {rng.choice(['<', '>='])} {rng.randint(1000, 400000)}"
    if kind == "date":
        return f"o_orderdate {rng.choice(['<', '>='])} '199{rng.randint(2, 8)}-0{rng.randint(1, 9)}-01'"
    return f"o_orderkey {rng.choice(['<', '>='])} {rng.randint(1, 4000)}"


def _arith(rng: random.Random, cols) -> str:
    a, b = rng.choice(cols), rng.choice(cols)
    op = rng.choice(["+", "-", "*"])
    if rng.random() < 0.5:
        return f"{a} {op} {b}"
    return f"{a} * (1 - {b})"


def random_query(rng: random.Random) -> str:
    use_join = rng.random() < 0.5
    if use_join:
        tables = ["lineitem", "orders"]
        num_cols = LINEITEM_NUM + ORDERS_NUM
        group_cols = LINEITEM_GROUP + ORDERS_GROUP
    else:
        t = rng.choice(["lineitem", "orders"])
        tables = [t]
        num_cols = LINEITEM_NUM if t == "lineitem" else ORDERS_NUM
        group_cols = LINEITEM_GROUP if t == "lineitem" else ORDERS_GROUP

    preds = []
    if use_join:
        preds.append("l_orderkey = o_orderkey")
    for t in tables:
        for _ in range(rng.randint(0, 2)):
            preds.append(_pred(rng, t))

    if rng.random() < 0.5:
        gcols = rng.sample(group_cols, rng.randint(1, 2))
        items = list(gcols)
        for i in range(rng.randint(1, 3)):
            agg = rng.choice(AGGS)
            if agg == "count":
                items.append(f"count(*) AS agg{i}")
            else:
                arg = _arith(rng, num_cols) if rng.random() < 0.4 else rng.choice(num_cols)
                items.append(f"{agg}({arg}) AS agg{i}")
        sql = f"SELECT {', '.join(items)} FROM {', '.join(tables)}"
        if preds:
            sql += " WHERE " + " AND ".join(preds)
        sql += " GROUP BY " + ", ".join(gcols)
        order_col = rng.choice(items[-1].split(" AS ")[-1:] + gcols)
        sql += f" ORDER BY {order_col} {rng.choice(['ASC', 'DESC'])}"
    else:
        cols = rng.sample(num_cols + group_cols, rng.randint(1, 3))
        items = list(cols)
        if rng.random() < 0.4:
            items.append(f"{_arith(rng, num_cols)} AS calc")
        sql = f"SELECT {', '.join(items)} FROM {', '.join(tables)}"
        if preds:
            sql += " WHERE " + " AND ".join(preds)
        if rng.random() < 0.5:
            sql += f" ORDER BY {rng.choice(cols)} {rng.choice(['ASC', 'DESC'])}"
    if rng.random() < 0.4:
        sql += f" LIMIT {rng.randint(0, 40)}"
    return sql
