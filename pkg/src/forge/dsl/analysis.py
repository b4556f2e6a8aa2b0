"""Cross-field validation and execution planning for parsed pipelines."""

from __future__ import annotations

from typing import Iterator

from forge.cron import CronParseError, parse_cron
from forge.dsl.model import (
    Diagnostic,
    ExecutionPlan,
    ParallelGroup,
    PipelineDef,
    SerialStage,
    StageDef,
    StepDef,
)


def iter_steps(pipeline: PipelineDef) -> Iterator[tuple[StageDef, StepDef]]:
    """Yield (owning stage, step) for every step, including parallel branches."""
    for stage in pipeline.stages:
        for branch in stage.parallel:
            for step in branch.steps:
                yield branch, step
        for step in stage.steps:
            yield stage, step


def validate(pipeline: PipelineDef) -> list[Diagnostic]:
    """Cross-field rules that only make sense on a whole document.

    Empty result means the pipeline is runnable:

    * every trigger's cron expression parses,
    * deployment mode has at least one publish step,
    * notify_users steps have configured recipients,
    * upload steps have a distribution endpoint.
    """
    diags: list[Diagnostic] = []
    src = pipeline.source_name

    for trigger in pipeline.triggers:
        try:
            parse_cron(trigger.cron_expression)
        except CronParseError as exc:
            diags.append(
                Diagnostic(src, trigger.pos[0], trigger.pos[1], f"invalid cron expression: {exc}")
            )

    steps = [(stage, step) for stage, step in iter_steps(pipeline)]
    if pipeline.delivery.mode == "deployment" and not any(
        step.kind == "publish" for _, step in steps
    ):
        diags.append(
            Diagnostic(src, 1, 1, "deployment mode requires at least one publish step")
        )
    for stage, step in steps:
        if step.kind == "notify_users" and not pipeline.delivery.user_recipients:
            diags.append(
                Diagnostic(
                    src,
                    step.pos[0],
                    step.pos[1],
                    f"notify_users step in stage '{stage.name}' requires at least one configured recipient",
                )
            )
        if step.kind == "upload" and not pipeline.delivery.distribution_endpoint:
            diags.append(
                Diagnostic(
                    src,
                    step.pos[0],
                    step.pos[1],
                    f"upload step in stage '{stage.name}' requires a distribution_endpoint",
                )
            )
    return diags


def plan(pipeline: PipelineDef) -> ExecutionPlan:
    """Flatten a validated pipeline into plan nodes in document order.

    Stages whose ``when_mode`` does not match the delivery mode are
    omitted.  Pure: no side effects, safe to call repeatedly.
    """
    mode = pipeline.delivery.mode
    nodes: list[SerialStage | ParallelGroup] = []
    for stage in pipeline.stages:
        if stage.when_mode not in ("always", mode):
            continue
        if stage.is_parallel:
            nodes.append(
                ParallelGroup(
                    name=stage.name,
                    branches=tuple(
                        SerialStage(b.name, b.steps, b.requires_signing)
                        for b in stage.parallel
                    ),
                )
            )
        else:
            nodes.append(SerialStage(stage.name, stage.steps, stage.requires_signing))
    return ExecutionPlan(nodes=tuple(nodes), mode=mode)
