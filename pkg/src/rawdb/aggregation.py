"""Parallel group-by aggregation strategies.

Input is a flat sequence of (key, value) records; output is a map from key
to the finalized aggregate. Every strategy must agree with the
single-threaded reference loop; they differ in how work and table ownership
are divided across threads:

  shared                    one table, per-key linearizable updates
                            (lock striping stands in for atomic RMW)
  independent               private table per thread, merged afterwards
  partition_and_aggregate   records routed to key partitions through a
                            (thread x partition) grid, each partition then
                            aggregated by a single owner thread
  plat                      partition-and-aggregate with a fixed-capacity
                            local table in front; overflow is partitioned
  hybrid                    small local tables checked first, flushed into
                            one large shared table when full
  contention_local          shared table, but keys detected as hot within a
                            sampling window are cloned into thread memory
  contention_global         hot keys get several balanced global copies

Function classes: count/sum/min/max are distributive, avg is algebraic
(carried as (sum, count)), median is holistic. Holistic aggregation needs a
group's values in one place, so only the strategies that never split a
group support it.
"""

from __future__ import annotations

import sys
import threading
from collections import Counter
from dataclasses import dataclass

from .errors import UnsupportedAggregationError, ZeroThreadsError

DISTRIBUTIVE = "distributive"
ALGEBRAIC = "algebraic"
HOLISTIC = "holistic"

_CLASS_OF = {
    "count": DISTRIBUTIVE,
    "sum": DISTRIBUTIVE,
    "min": DISTRIBUTIVE,
    "max": DISTRIBUTIVE,
    "avg": ALGEBRAIC,
    "median": HOLISTIC,
}

STRATEGIES = (
    "shared",
    "independent",
    "partition_and_aggregate",
    "plat",
    "hybrid",
    "contention_local",
    "contention_global",
)

# capability matrix: strategy -> (distributive, algebraic, holistic)
CAPABILITIES = {
    "shared": (True, True, True),
    "independent": (True, True, False),
    "partition_and_aggregate": (True, True, True),
    "plat": (True, True, False),
    "hybrid": (True, True, False),
    "contention_local": (True, True, False),
    "contention_global": (True, True, False),
}

PLAT_LOCAL_CAPACITY = 1024
HYBRID_LOCAL_CAPACITY = 64
CONTENTION_WINDOW = 1024  # records per hot-key sampling window
CONTENTION_SHARE = 0.5  # a key is hot above this share of a window

_N_STRIPES = 256


@dataclass(frozen=True)
class AggFunction:
    name: str
    agg_class: str


def agg_function(name: str) -> AggFunction:
    return AggFunction(name=name, agg_class=_CLASS_OF[name])


def supports(strategy: str, f: AggFunction) -> bool:
    dist, alg, hol = CAPABILITIES[strategy]
    return {DISTRIBUTIVE: dist, ALGEBRAIC: alg, HOLISTIC: hol}[f.agg_class]


# --- cell representation ---
# every table cell is a small list so update and combine stay uniform:
#   count [n] | sum/min/max [x] | avg [sum, n] | median [v1, v2, ...]


def _cell_ops(f: AggFunction):
    """(new, upd) pair: create a cell from the first value, fold another in."""
    name = f.name
    if name == "count":
        def new(v):
            return [1]

        def upd(c, v):
            c[0] += 1
    elif name == "sum":
        def new(v):
            return [v]

        def upd(c, v):
            c[0] += v
    elif name == "min":
        def new(v):
            return [v]

        def upd(c, v):
            if v < c[0]:
                c[0] = v
    elif name == "max":
        def new(v):
            return [v]

        def upd(c, v):
            if v > c[0]:
                c[0] = v
    elif name == "avg":
        def new(v):
            return [v, 1]

        def upd(c, v):
            c[0] += v
            c[1] += 1
    elif name == "median":
        def new(v):
            return [v]

        def upd(c, v):
            c.append(v)
    else:
        raise ValueError(f"unknown aggregate {name!r}")
    return new, upd


def _combine_cell(a: list, b: list, f: AggFunction) -> list:
    name = f.name
    if name in ("count", "sum"):
        return [a[0] + b[0]]
    if name == "min":
        return [a[0] if a[0] <= b[0] else b[0]]
    if name == "max":
        return [a[0] if a[0] >= b[0] else b[0]]
    if name == "avg":
        return [a[0] + b[0], a[1] + b[1]]
    return a + b  # median: concat value lists


def _combine_into(target: dict, source: dict, f: AggFunction) -> None:
    for k, cell in source.items():
        cur = target.get(k)
        target[k] = cell if cur is None else _combine_cell(cur, cell, f)


def _finalize(cells: dict, f: AggFunction) -> dict:
    name = f.name
    if name == "avg":
        return {k: c[0] / c[1] for k, c in cells.items()}
    if name == "median":
        return {k: sorted(c)[(len(c) - 1) // 2] for k, c in cells.items()}
    return {k: c[0] for k, c in cells.items()}


def merge_tables(partials: list[dict], f: AggFunction) -> dict:
    """Key-wise combination of partial result maps from one aggregate run.

    Distributive partials hold plain values; avg partials hold (sum, count)
    pairs and are finalized here to sum/count.
    """
    merged: dict = {}
    for part in partials:
        for k, v in part.items():
            cell = list(v) if isinstance(v, (tuple, list)) else [v]
            cur = merged.get(k)
            merged[k] = cell if cur is None else _combine_cell(cur, cell, f)
    return _finalize(merged, f)


def reference_aggregate(records, f: AggFunction) -> dict:
    """Single-threaded oracle every strategy must match."""
    keys, vals = _as_lists(records)
    new, upd = _cell_ops(f)
    tbl: dict = {}
    for k, v in zip(keys, vals):
        c = tbl.get(k)
        if c is None:
            tbl[k] = new(v)
        else:
            upd(c, v)
    return _finalize(tbl, f)


def _as_lists(records) -> tuple[list, list]:
    # runners only read and slice, so existing lists are passed through
    if isinstance(records, tuple) and len(records) == 2:
        keys, vals = records
        if not isinstance(keys, list):
            keys = keys.tolist() if hasattr(keys, "tolist") else list(keys)
        if not isinstance(vals, list):
            vals = vals.tolist() if hasattr(vals, "tolist") else list(vals)
        return keys, vals
    keys, vals = [], []
    for k, v in records:
        keys.append(k)
        vals.append(v)
    return keys, vals


def _chunk_bounds(n: int, threads: int) -> list[tuple[int, int]]:
    size, extra = divmod(n, threads)
    bounds = []
    start = 0
    for t in range(threads):
        end = start + size + (1 if t < extra else 0)
        bounds.append((start, end))
        start = end
    return bounds


def _run_threads(workers: list) -> None:
    if len(workers) == 1:
        workers[0]()
        return
    errors: list[BaseException] = []

    def wrap(fn):
        def run():
            try:
                fn()
            except BaseException as exc:  # propagate to caller
                errors.append(exc)
        return run

    ts = [threading.Thread(target=wrap(fn)) for fn in workers]
    # the default 5ms switch interval lets a preemption land inside a stripe
    # lock's critical section, piling every other thread onto that lock
    # (pathological on heavy hitters); a coarser interval avoids the convoy
    old_interval = sys.getswitchinterval()
    sys.setswitchinterval(0.05)
    try:
        for t in ts:
            t.start()
        for t in ts:
            t.join()
    finally:
        sys.setswitchinterval(old_interval)
    if errors:
        raise errors[0]


def aggregate(records, f: AggFunction, strategy: str, threads: int) -> dict:
    """Run one group-by aggregation with the given strategy and thread count.

    The result map is identical to reference_aggregate for every supported
    (strategy, function-class) pair and is independent of the thread count.
    """
    if threads < 1:
        raise ZeroThreadsError(f"threads must be >= 1, got {threads}")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if not supports(strategy, f):
        raise UnsupportedAggregationError(strategy, f.agg_class)
    keys, vals = _as_lists(records)
    if not keys:
        return {}
    runner = {
        "shared": _run_shared,
        "independent": _run_independent,
        "partition_and_aggregate": _run_partition_and_aggregate,
        "plat": _run_plat,
        "hybrid": _run_hybrid,
        "contention_local": _run_contention_local,
        "contention_global": _run_contention_global,
    }[strategy]
    cells = runner(keys, vals, f, threads)
    return _finalize(cells, f)


# --- strategy runners (return raw cell tables) ---


def _run_shared(keys, vals, f, threads) -> dict:
    tbl: dict = {}
    locks = [threading.Lock() for _ in range(_N_STRIPES)]
    new, upd = _cell_ops(f)

    def scan(start, end):
        for k, v in zip(keys[start:end], vals[start:end]):
            lk = locks[k & 255]
            lk.acquire()
            c = tbl.get(k)
            if c is None:
                tbl[k] = new(v)
            else:
                upd(c, v)
            lk.release()

    _run_threads([lambda s=s, e=e: scan(s, e) for s, e in _chunk_bounds(len(keys), threads)])
    return tbl


def _run_independent(keys, vals, f, threads) -> dict:
    tables: list[dict] = [{} for _ in range(threads)]
    new, upd = _cell_ops(f)

    def scan(t, start, end):
        local = tables[t]
        get = local.get
        for k, v in zip(keys[start:end], vals[start:end]):
            c = get(k)
            if c is None:
                local[k] = new(v)
            else:
                upd(c, v)

    _run_threads(
        [lambda t=t, s=s, e=e: scan(t, s, e) for t, (s, e) in enumerate(_chunk_bounds(len(keys), threads))]
    )
    merged = tables[0]
    for part in tables[1:]:
        _combine_into(merged, part, f)
    return merged


def _run_partition_and_aggregate(keys, vals, f, threads) -> dict:
    # grid[t][p]: records thread t routed to partition p; cell (t, p) is
    # written by exactly one thread, so the scan phase needs no locks
    nparts = threads
    grid = [[[] for _ in range(nparts)] for _ in range(threads)]
    new, upd = _cell_ops(f)

    def route(t, start, end):
        row = grid[t]
        for k, v in zip(keys[start:end], vals[start:end]):
            row[k % nparts].append((k, v))

    _run_threads(
        [lambda t=t, s=s, e=e: route(t, s, e) for t, (s, e) in enumerate(_chunk_bounds(len(keys), threads))]
    )

    ptables: list[dict] = [{} for _ in range(nparts)]

    def fold(p):
        local = ptables[p]
        get = local.get
        for t in range(threads):
            for k, v in grid[t][p]:
                c = get(k)
                if c is None:
                    local[k] = new(v)
                else:
                    upd(c, v)

    _run_threads([lambda p=p: fold(p) for p in range(nparts)])
    out = ptables[0]
    for part in ptables[1:]:
        out.update(part)  # key partitions are disjoint
    return out


def _run_plat(keys, vals, f, threads, capacity: int = PLAT_LOCAL_CAPACITY) -> dict:
    nparts = threads
    grid = [[[] for _ in range(nparts)] for _ in range(threads)]
    locals_: list[dict] = [{} for _ in range(threads)]
    new, upd = _cell_ops(f)

    def scan(t, start, end):
        local = locals_[t]
        get = local.get
        row = grid[t]
        for k, v in zip(keys[start:end], vals[start:end]):
            c = get(k)
            if c is not None:
                upd(c, v)
            elif len(local) < capacity:
                local[k] = new(v)
            else:
                row[k % nparts].append((k, v))

    _run_threads(
        [lambda t=t, s=s, e=e: scan(t, s, e) for t, (s, e) in enumerate(_chunk_bounds(len(keys), threads))]
    )

    ptables: list[dict] = [{} for _ in range(nparts)]

    def fold(p):
        local = ptables[p]
        get = local.get
        for t in range(threads):
            for k, v in grid[t][p]:
                c = get(k)
                if c is None:
                    local[k] = new(v)
                else:
                    upd(c, v)

    _run_threads([lambda p=p: fold(p) for p in range(nparts)])

    out: dict = {}
    for part in ptables + locals_:
        _combine_into(out, part, f)
    return out


def _run_hybrid(keys, vals, f, threads, capacity: int = HYBRID_LOCAL_CAPACITY) -> dict:
    global_tbl: dict = {}
    locks = [threading.Lock() for _ in range(_N_STRIPES)]
    new, upd = _cell_ops(f)

    def flush(local: dict):
        for k, cell in local.items():
            lk = locks[k & 255]
            lk.acquire()
            cur = global_tbl.get(k)
            global_tbl[k] = cell if cur is None else _combine_cell(cur, cell, f)
            lk.release()
        local.clear()

    def scan(start, end):
        local: dict = {}
        get = local.get
        for k, v in zip(keys[start:end], vals[start:end]):
            c = get(k)
            if c is not None:
                upd(c, v)
            else:
                if len(local) >= capacity:
                    flush(local)
                local[k] = new(v)
        flush(local)

    _run_threads([lambda s=s, e=e: scan(s, e) for s, e in _chunk_bounds(len(keys), threads)])
    return global_tbl


def _hot_keys(window_keys: list) -> set:
    counts = Counter(window_keys)
    bar = len(window_keys) * CONTENTION_SHARE
    return {k for k, n in counts.items() if n > bar}


def _run_contention_local(keys, vals, f, threads) -> dict:
    global_tbl: dict = {}
    locks = [threading.Lock() for _ in range(_N_STRIPES)]
    clone_tables: list[dict] = [{} for _ in range(threads)]
    new, upd = _cell_ops(f)

    def scan(t, start, end):
        clones = clone_tables[t]
        hot: set = set()
        get = clones.get
        for wstart in range(start, end, CONTENTION_WINDOW):
            wend = min(wstart + CONTENTION_WINDOW, end)
            wkeys = keys[wstart:wend]
            wvals = vals[wstart:wend]
            hot |= _hot_keys(wkeys)
            for k, v in zip(wkeys, wvals):
                c = get(k)
                if c is not None:
                    upd(c, v)
                elif k in hot:
                    clones[k] = new(v)
                else:
                    lk = locks[k & 255]
                    lk.acquire()
                    gc = global_tbl.get(k)
                    if gc is None:
                        global_tbl[k] = new(v)
                    else:
                        upd(gc, v)
                    lk.release()

    _run_threads(
        [lambda t=t, s=s, e=e: scan(t, s, e) for t, (s, e) in enumerate(_chunk_bounds(len(keys), threads))]
    )
    for clones in clone_tables:
        _combine_into(global_tbl, clones, f)
    return global_tbl


def _run_contention_global(keys, vals, f, threads) -> dict:
    global_tbl: dict = {}
    locks = [threading.Lock() for _ in range(_N_STRIPES)]
    # hot keys get n_copies balanced global copies; thread t always uses
    # copy t % n_copies, so threads spread evenly over the copies
    n_copies = max(1, min(threads, 4))
    copies: dict = {}  # key -> per-copy cell list
    copy_locks = [threading.Lock() for _ in range(n_copies)]
    registry_lock = threading.Lock()
    new, upd = _cell_ops(f)

    def scan(t, start, end):
        slot = t % n_copies
        slot_lock = copy_locks[slot]
        for wstart in range(start, end, CONTENTION_WINDOW):
            wend = min(wstart + CONTENTION_WINDOW, end)
            wkeys = keys[wstart:wend]
            wvals = vals[wstart:wend]
            hot = _hot_keys(wkeys)
            if hot:
                with registry_lock:
                    for k in hot:
                        if k not in copies:
                            copies[k] = [None] * n_copies
            for k, v in zip(wkeys, wvals):
                cells = copies.get(k)
                if cells is not None:
                    slot_lock.acquire()
                    c = cells[slot]
                    if c is None:
                        cells[slot] = new(v)
                    else:
                        upd(c, v)
                    slot_lock.release()
                else:
                    lk = locks[k & 255]
                    lk.acquire()
                    gc = global_tbl.get(k)
                    if gc is None:
                        global_tbl[k] = new(v)
                    else:
                        upd(gc, v)
                    lk.release()

    _run_threads(
        [lambda t=t, s=s, e=e: scan(t, s, e) for t, (s, e) in enumerate(_chunk_bounds(len(keys), threads))]
    )
    for k, cells in copies.items():
        for cell in cells:
            if cell is not None:
                cur = global_tbl.get(k)
                global_tbl[k] = cell if cur is None else _combine_cell(cur, cell, f)
    return global_tbl
