from .compile import CompiledQuery, compile_tasks
from .graph import Task, TaskGraph
from .pool import ExecutionTrace, LazyInput, WorkerPool, execute

__all__ = [
    "CompiledQuery",
    "ExecutionTrace",
    "LazyInput",
    "Task",
    "TaskGraph",
    "WorkerPool",
    "compile_tasks",
    "execute",
]
