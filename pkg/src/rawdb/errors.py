"""Exception taxonomy for the whole engine.

Every error raised on a query path derives from RawdbError so callers
(CLI, service) can report a diagnostic without crashing the process.
Plain OS-level failures (missing files, unwritable paths) use the
builtin FileNotFoundError / OSError.
"""


class RawdbError(Exception):
    """Base class for all engine errors."""


# --- catalog / storage ---

class CatalogError(RawdbError):
    pass


class DuplicateTableError(CatalogError):
    pass


class UnsupportedFormatError(CatalogError):
    pass


class EmptyFileError(CatalogError):
    pass


class RaggedRowsError(CatalogError):
    pass


class ParseError(CatalogError):
    """A data row failed to parse; carries the 1-based row number."""

    def __init__(self, message: str, row_number: int):
        super().__init__(f"row {row_number}: {message}")
        self.row_number = row_number


class KeyConflictError(CatalogError):
    """persist() called with an existing key bound to different contents."""


# --- SQL frontend ---

class FrontendError(RawdbError):
    pass


class SqlSyntaxError(FrontendError):
    """Syntax error in the SQL text; carries the 0-based character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class BindError(FrontendError):
    pass


class UnknownTableError(BindError):
    pass


class UnknownColumnError(BindError):
    pass


class AmbiguousColumnError(BindError):
    pass


class UnknownUdfError(BindError):
    pass


class UdfArityMismatchError(BindError):
    pass


class TypeMismatchError(RawdbError):
    """Operand or key types are incompatible (predicate literal, index probe)."""


# --- planner ---

class PlannerError(RawdbError):
    pass


class UnknownOperatorTypeError(PlannerError):
    pass


class UnsupportedQueryError(PlannerError):
    pass


# --- executor ---

class TaskPanickedError(RawdbError):
    """A task raised; in-flight tasks were drained before propagation."""

    def __init__(self, task_id: str, cause: BaseException):
        super().__init__(f"task {task_id} panicked: {cause!r}")
        self.task_id = task_id
        self.cause = cause


# --- learned index ---

class LearnedIndexError(RawdbError):
    pass


class InvalidRangeError(LearnedIndexError):
    pass


class NotSortedError(LearnedIndexError):
    pass


class OverlappingPartitionsError(LearnedIndexError):
    pass


# --- parallel aggregation ---

class AggregationError(RawdbError):
    pass


class UnsupportedAggregationError(AggregationError):
    def __init__(self, strategy: str, agg_class: str):
        super().__init__(f"strategy {strategy!r} does not support {agg_class} aggregation")
        self.strategy = strategy
        self.agg_class = agg_class


class ZeroThreadsError(AggregationError):
    pass


# --- UDF registry ---

class UdfError(RawdbError):
    pass


class DuplicateUdfError(UdfError):
    pass


class InvalidArityError(UdfError):
    pass


class UdfRaisedError(UdfError):
    """Wraps an exception raised inside a user function."""

    def __init__(self, name: str, cause: BaseException):
        super().__init__(f"UDF {name!r} raised: {cause!r}")
        self.name = name
        self.cause = cause


# --- datagen ---

class DatagenError(RawdbError):
    pass


class IndivisibleSizeError(DatagenError):
    pass


class CardinalityInfeasibleError(DatagenError):
    pass


class WindowExceedsCardinalityError(DatagenError):
    pass


# --- bench ---

class VerificationFailedError(RawdbError):
    def __init__(self, query_name: str, detail: str):
        super().__init__(f"verification failed for {query_name}: {detail}")
        self.query_name = query_name
        self.detail = detail
