from .engine_plan import (
    EngineOperator,
    EnginePlan,
    convert_to_engine_plan,
    render_explain,
    serialize_plan,
)
from .logical import build_logical_plan
from .physical import OperatorGroup, PhysicalPlan, PhysOp, to_physical

__all__ = [
    "EngineOperator",
    "EnginePlan",
    "OperatorGroup",
    "PhysOp",
    "PhysicalPlan",
    "build_logical_plan",
    "convert_to_engine_plan",
    "render_explain",
    "serialize_plan",
    "to_physical",
]
