"""Task graph: units of work over partitions plus their dependency edges.

A task's fn receives one argument per entry of `inputs`, each the output of
that producing task. Inputs listed in `lazy` arrive as LazyInput handles
and are fetched (and accounted) only if the task calls .get(); everything
else is materialized before the task starts. A task id doubles as the
partition ref of its output.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Task:
    id: str
    fn: object  # callable(*resolved_inputs) -> payload
    inputs: list[str] = field(default_factory=list)
    lazy: frozenset = frozenset()


@dataclass
class TaskGraph:
    tasks: dict[str, Task] = field(default_factory=dict)
    order: list[str] = field(default_factory=list)  # insertion order

    def add(self, task: Task) -> str:
        if task.id in self.tasks:
            raise ValueError(f"duplicate task id {task.id!r}")
        self.tasks[task.id] = task
        self.order.append(task.id)
        return task.id

    def edges(self) -> list[tuple[str, str]]:
        return [
            (src, t.id)
            for t in self.tasks.values()
            for src in dict.fromkeys(t.inputs)
        ]

    def consumers(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {tid: [] for tid in self.tasks}
        for src, dst in self.edges():
            out[src].append(dst)
        return out

    def sinks(self) -> list[str]:
        consumed = {src for src, _ in self.edges()}
        return [tid for tid in self.order if tid not in consumed]

    def validate(self) -> None:
        """Every edge endpoint exists and the graph is acyclic."""
        for t in self.tasks.values():
            for src in t.inputs:
                if src not in self.tasks:
                    raise ValueError(f"task {t.id!r} depends on unknown {src!r}")
        indeg = {tid: len(set(t.inputs)) for tid, t in self.tasks.items()}
        ready = [tid for tid, d in indeg.items() if d == 0]
        seen = 0
        consumers = self.consumers()
        while ready:
            tid = ready.pop()
            seen += 1
            for dst in set(consumers[tid]):
                indeg[dst] -= 1
                if indeg[dst] == 0:
                    ready.append(dst)
        if seen != len(self.tasks):
            raise ValueError("task graph contains a cycle")
