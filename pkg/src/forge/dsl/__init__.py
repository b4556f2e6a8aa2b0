"""Pipeline-as-code definition language: parse, validate, plan."""

from forge.dsl.analysis import iter_steps, plan, validate
from forge.dsl.model import (
    COMMAND_KINDS,
    MODE_DELIVERY,
    MODE_DEPLOYMENT,
    MODES,
    STEP_KINDS,
    DeliveryConfig,
    Diagnostic,
    ExecutionPlan,
    ParallelGroup,
    PipelineDef,
    PlanNode,
    SerialStage,
    SigningConfig,
    StageDef,
    StepDef,
    TriggerDef,
)
from forge.dsl.parser import ParseResult, parse_pipeline

__all__ = [
    "COMMAND_KINDS",
    "MODE_DELIVERY",
    "MODE_DEPLOYMENT",
    "MODES",
    "STEP_KINDS",
    "DeliveryConfig",
    "Diagnostic",
    "ExecutionPlan",
    "ParallelGroup",
    "ParseResult",
    "PipelineDef",
    "PlanNode",
    "SerialStage",
    "SigningConfig",
    "StageDef",
    "StepDef",
    "TriggerDef",
    "iter_steps",
    "parse_pipeline",
    "plan",
    "validate",
]
