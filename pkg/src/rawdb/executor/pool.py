"""Worker pool and scheduler.

Workers are threads standing in for cluster nodes; each owns a partition
store. The scheduler keeps a FIFO ready queue and hands one task at a time
to each idle worker, preferring the worker that owns the task's largest
input partition. Reading a partition owned by another worker is recorded as
a transfer with an estimated byte size, which tests use to show pruning
reduces data movement. A partition is released as soon as its last consumer
finishes.

Messages flow through queues only: task assignments down to workers,
completions back up. If a task raises, dispatch stops, in-flight tasks are
drained, and TaskPanickedError propagates.
"""

from __future__ import annotations

import queue
import threading
import time
from collections import deque
from dataclasses import dataclass, field

from ..errors import TaskPanickedError
from ..relation import Partition, PartitionedRelation
from .graph import TaskGraph


def est_bytes(value) -> int:
    """Coarse deterministic size model for transfer accounting."""
    if isinstance(value, Partition):
        rows = value.rows
    elif isinstance(value, PartitionedRelation):
        return sum(est_bytes(p) for p in value.partitions)
    elif isinstance(value, list):
        rows = value
    elif isinstance(value, tuple) and len(value) == 2 and isinstance(value[0], list):
        rows = value[0]
    else:
        return 64
    if not rows:
        return 0
    width = len(rows[0]) if isinstance(rows[0], tuple) else 1
    return len(rows) * width * 8


@dataclass
class ExecutionTrace:
    """Line-oriented execution log (task start/end, reads, releases)."""

    events: list = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def record(self, kind: str, **fields) -> None:
        with self._lock:
            self.events.append((len(self.events), kind, fields))

    def of_kind(self, kind: str) -> list:
        return [e for e in self.events if e[1] == kind]

    def to_text(self) -> str:
        lines = []
        for seq, kind, fields in self.events:
            body = " ".join(f"{k}={v}" for k, v in fields.items())
            lines.append(f"seq={seq} event={kind} {body}")
        return "\n".join(lines)


class WorkerPool:
    """worker_count thread workers, each with an owned partition store."""

    def __init__(self, worker_count: int):
        if worker_count < 1:
            raise ValueError("worker_count must be >= 1")
        self.worker_count = worker_count
        self.stores: list[dict] = [{} for _ in range(worker_count)]
        self.owner: dict[str, int] = {}
        self.sizes: dict[str, int] = {}
        self.transfers: dict[str, int] = {}  # ref -> bytes moved between workers
        self.total_transferred = 0
        self._lock = threading.Lock()

    def put(self, ref: str, value, worker: int) -> None:
        with self._lock:
            self.stores[worker][ref] = value
            self.owner[ref] = worker
            self.sizes[ref] = est_bytes(value)

    def fetch(self, ref: str, worker: int, task_id: str, trace: ExecutionTrace | None):
        with self._lock:
            owner = self.owner[ref]
            value = self.stores[owner][ref]
            size = self.sizes[ref]
            remote = owner != worker
            if remote:
                self.transfers[ref] = self.transfers.get(ref, 0) + size
                self.total_transferred += size
        if trace is not None:
            trace.record(
                "read", task=task_id, worker=worker, ref=ref,
                bytes=size, remote=int(remote),
            )
        return value

    def release(self, ref: str, trace: ExecutionTrace | None) -> None:
        with self._lock:
            owner = self.owner.get(ref)
            if owner is not None:
                self.stores[owner].pop(ref, None)
        if trace is not None:
            trace.record("release", ref=ref)

    def size_of(self, ref: str) -> int:
        with self._lock:
            return self.sizes.get(ref, 0)

    def owner_of(self, ref: str) -> int | None:
        with self._lock:
            return self.owner.get(ref)

    def transferred(self, ref: str) -> int:
        with self._lock:
            return self.transfers.get(ref, 0)


class LazyInput:
    """Fetch-on-demand handle; pruned join tasks never touch their partition."""

    def __init__(self, pool: WorkerPool, ref: str, worker: int, task_id: str, trace):
        self._pool = pool
        self.ref = ref
        self._worker = worker
        self._task_id = task_id
        self._trace = trace

    def get(self):
        return self._pool.fetch(self.ref, self._worker, self._task_id, self._trace)


def execute(
    graph: TaskGraph,
    pool: WorkerPool,
    trace: ExecutionTrace | None = None,
) -> dict:
    """Run every task exactly once; returns {sink id: output}.

    The result is a pure function of the graph: outputs are keyed by task
    id, so scheduling interleavings and worker_count never change it.
    """
    graph.validate()
    if not graph.tasks:
        return {}

    consumers = graph.consumers()
    indeg = {tid: len(set(t.inputs)) for tid, t in graph.tasks.items()}
    sinks = set(graph.sinks())
    # +1 virtual consumer keeps sink outputs alive for the caller
    remaining_consumers = {
        tid: len(set(consumers[tid])) + (1 if tid in sinks else 0)
        for tid in graph.tasks
    }

    ready = deque(tid for tid in graph.order if indeg[tid] == 0)
    completion: queue.Queue = queue.Queue()
    inboxes = [queue.Queue() for _ in range(pool.worker_count)]

    def worker_loop(wid: int):
        while True:
            task = inboxes[wid].get()
            if task is None:
                return
            if trace is not None:
                trace.record("start", task=task.id, worker=wid, t=time.monotonic())
            try:
                args = []
                for ref in task.inputs:
                    if ref in task.lazy:
                        args.append(LazyInput(pool, ref, wid, task.id, trace))
                    else:
                        args.append(pool.fetch(ref, wid, task.id, trace))
                out = task.fn(*args)
            except BaseException as exc:
                completion.put((task.id, wid, None, exc))
                continue
            pool.put(task.id, out, wid)
            if trace is not None:
                trace.record("end", task=task.id, worker=wid, t=time.monotonic())
            completion.put((task.id, wid, out, None))

    threads = [
        threading.Thread(target=worker_loop, args=(w,), daemon=True)
        for w in range(pool.worker_count)
    ]
    for t in threads:
        t.start()

    idle = deque(range(pool.worker_count))
    in_flight = 0
    done = 0
    failure: tuple | None = None

    def preferred_worker(task) -> int | None:
        best_ref, best_size = None, -1
        for ref in task.inputs:
            size = pool.size_of(ref)
            if size > best_size:
                best_ref, best_size = ref, size
        return pool.owner_of(best_ref) if best_ref is not None else None

    def dispatch():
        nonlocal in_flight
        while idle and ready:
            wid = idle.popleft()
            pick_i = 0
            for i, tid in enumerate(ready):
                if preferred_worker(graph.tasks[tid]) == wid:
                    pick_i = i
                    break
            ready.rotate(-pick_i)
            tid = ready.popleft()
            ready.rotate(pick_i)
            task = graph.tasks[tid]
            if trace is not None:
                trace.record("dispatch", task=tid, worker=wid)
            inboxes[wid].put(task)
            in_flight += 1

    try:
        dispatch()
        while done < len(graph.tasks) and (in_flight > 0 or ready):
            tid, wid, _, exc = completion.get()
            in_flight -= 1
            done += 1
            idle.append(wid)
            if exc is not None:
                if failure is None:
                    failure = (tid, exc)
                ready.clear()  # drain in-flight, dispatch nothing new
                if in_flight == 0:
                    break
                continue
            if failure is None:
                for dst in dict.fromkeys(consumers[tid]):
                    indeg[dst] -= 1
                    if indeg[dst] == 0:
                        ready.append(dst)
                for ref in dict.fromkeys(graph.tasks[tid].inputs):
                    remaining_consumers[ref] -= 1
                    if remaining_consumers[ref] == 0:
                        pool.release(ref, trace)
                dispatch()
            elif in_flight == 0:
                break
    finally:
        for box in inboxes:
            box.put(None)
        for t in threads:
            t.join()

    if failure is not None:
        raise TaskPanickedError(failure[0], failure[1])
    return {tid: pool.stores[pool.owner[tid]][tid] for tid in sinks}
