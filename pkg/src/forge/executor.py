"""Plan execution: spawn step commands, capture output, enforce fail-fast.

One run executes at a time; within a run only parallel-group branches are
concurrent, each branch running its own steps serially.  Serial stages
stop at the first failed step (remaining steps are skipped); once a stage
fails, every later stage is skipped.  Parallel branches are never
cancelled by a failing sibling — their logs stay complete.

Shell steps run under ``/bin/sh -c`` in the run workspace with the merged
environment (process env, then pipeline env, then step env; rightmost
wins) inside their own process group, so a timeout can kill the whole
process tree.  Log streams are scrubbed: values of env vars whose name
ends in ``_PASSWORD``, or that are named by the signing config, never
reach disk.
"""

from __future__ import annotations

import os
import re
import signal
import subprocess
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, IO, Mapping

from forge import delivery as delivery_mod
from forge import scm
from forge.dsl import ExecutionPlan, ParallelGroup, PipelineDef, SerialStage, StepDef, plan as make_plan
from forge.errors import ConfigError, ForgeError
from forge.gates import acceptance_gate, parse_test_summary, verify_signing
from forge.records import (
    PROMOTION_AWAITING,
    PROMOTION_NOT_APPLICABLE,
    PROMOTION_PROMOTED,
    Promotion,
    RunRecord,
    StageResult,
    Status,
    StepResult,
)
from forge.store import Store

REDACTED = b"[REDACTED]"
_SLUG_RE = re.compile(r"[^A-Za-z0-9_-]+")


class NothingToPromoteError(ForgeError):
    pass


class PromotionFailedError(ForgeError):
    pass


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


def _slug(name: str) -> str:
    return _SLUG_RE.sub("_", name).strip("_") or "stage"


@dataclass
class DeliverySettings:
    """Resolved delivery-side configuration for one run."""

    mode: str = "delivery"
    team_webhook_url: str | None = None
    user_recipients: tuple[str, ...] = ()
    outbox_dir: Path = Path("outbox")
    distribution_endpoint: str | None = None
    artifact_glob: str = "**/*.apk"


@dataclass
class RunContext:
    """Everything a run needs: workspace, env layers, store, delivery wiring."""

    store: Store
    run_number: int
    workspace: Path
    pipeline: PipelineDef
    settings: DeliverySettings
    commit: str = "manual"
    base_env: dict[str, str] = field(default_factory=dict)
    cancel: threading.Event = field(default_factory=threading.Event)
    progress: Callable[[str, Status], None] | None = None
    now_fn: Callable[[], datetime] = _utcnow
    receipt: delivery_mod.DistributionReceipt | None = None
    artifact: delivery_mod.Artifact | None = None
    deferred_publish: list[tuple[str, StepDef]] = field(default_factory=list)
    stage_index: int = 0
    _mutex: threading.Lock = field(default_factory=threading.Lock)

    @property
    def log_root(self) -> Path:
        return self.store.logs_dir(self.run_number)

    def signing_env_names(self) -> list[str]:
        cfg = self.pipeline.signing
        if cfg is None:
            return []
        return [cfg.store_password_env, cfg.key_password_env]

    def merged_env(self, step: StepDef | None = None) -> dict[str, str]:
        env = dict(self.base_env)
        env.update(self.pipeline.environment)
        if step is not None:
            env.update(step.env)
        return env


def secret_values(env: Mapping[str, str], signing_names: list[str]) -> list[bytes]:
    secrets = []
    for name, value in env.items():
        if value and (name.endswith("_PASSWORD") or name in signing_names):
            secrets.append(value.encode())
    return secrets


def scrub_secrets(data: bytes, secrets: list[bytes]) -> bytes:
    for secret in sorted(secrets, key=len, reverse=True):
        data = data.replace(secret, REDACTED)
    return data


def _pump(stream: IO[bytes], path: Path, secrets: list[bytes]) -> None:
    with open(path, "wb") as fh:
        for line in iter(stream.readline, b""):
            fh.write(scrub_secrets(line, secrets))


def _rel(store: Store, path: Path) -> str:
    return str(path.relative_to(store.root))


def _write_log_pair(
    log_dir: Path, index: int, out_text: str, err_text: str
) -> tuple[Path, Path]:
    log_dir.mkdir(parents=True, exist_ok=True)
    out_path = log_dir / f"{index:02d}.out.log"
    err_path = log_dir / f"{index:02d}.err.log"
    out_path.write_text(out_text, encoding="utf-8")
    err_path.write_text(err_text, encoding="utf-8")
    return out_path, err_path


def run_command_step(
    step: StepDef,
    *,
    workspace: Path,
    env: dict[str, str],
    secrets: list[bytes],
    log_dir: Path,
    index: int,
    store: Store,
    now_fn: Callable[[], datetime] = _utcnow,
) -> StepResult:
    """Run one sh/publish command under the shell, streaming scrubbed logs."""
    log_dir.mkdir(parents=True, exist_ok=True)
    out_path = log_dir / f"{index:02d}.out.log"
    err_path = log_dir / f"{index:02d}.err.log"
    result = StepResult(
        name=step.kind,
        kind=step.kind,
        command=step.command,
        started_at=now_fn(),
        stdout_log=_rel(store, out_path),
        stderr_log=_rel(store, err_path),
    )
    started = time.monotonic()
    try:
        proc = subprocess.Popen(
            step.command,
            shell=True,
            cwd=workspace,
            env=env,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            start_new_session=True,  # own process group: timeout kills the tree
        )
    except OSError as exc:
        out_path.write_bytes(b"")
        err_path.write_text(f"failed to spawn command: {exc}\n", encoding="utf-8")
        result.status = Status.FAILED
        result.message = f"failed to spawn command: {exc}"
        result.ended_at = now_fn()
        return result

    assert proc.stdout is not None and proc.stderr is not None
    readers = [
        threading.Thread(target=_pump, args=(proc.stdout, out_path, secrets)),
        threading.Thread(target=_pump, args=(proc.stderr, err_path, secrets)),
    ]
    for t in readers:
        t.start()
    try:
        exit_code = proc.wait(timeout=step.timeout_seconds)
    except subprocess.TimeoutExpired:
        try:
            os.killpg(os.getpgid(proc.pid), signal.SIGKILL)
        except (ProcessLookupError, PermissionError):
            proc.kill()
        proc.wait()
        result.timed_out = True
        exit_code = proc.returncode
    for t in readers:
        t.join()

    result.exit_code = exit_code
    result.ended_at = now_fn()
    result.duration_ms = int((time.monotonic() - started) * 1000)
    if result.timed_out:
        result.status = Status.FAILED
        result.message = f"timed out after {step.timeout_seconds}s"
    elif exit_code == 0:
        result.status = Status.SUCCESS
    else:
        result.status = Status.FAILED
        result.message = f"exit code {exit_code}"

    if step.acceptance:
        _apply_acceptance_gate(result, out_path)
    return result


def _apply_acceptance_gate(result: StepResult, out_path: Path) -> None:
    # The gate reads the textual summary; a bad summary fails the step even
    # on exit 0, and a clean summary does not rescue a nonzero exit.
    output = out_path.read_text(encoding="utf-8", errors="replace")
    decision = acceptance_gate(parse_test_summary(output))
    if not decision.ok:
        result.status = Status.FAILED
        result.message = f"acceptance gate: {decision.reason}"
    elif result.status is Status.FAILED and not result.timed_out:
        result.message = (
            f"exit code {result.exit_code} (test summary itself was clean)"
        )


def _skipped_step(step: StepDef, message: str) -> StepResult:
    return StepResult(
        name=step.kind,
        kind=step.kind,
        command=step.command,
        status=Status.SKIPPED,
        message=message,
    )


def execute_step(
    step: StepDef, ctx: RunContext, log_dir: Path, index: int
) -> StepResult:
    """Dispatch a step: sh/publish to the shell, the rest internally."""
    if step.kind in ("sh", "publish"):
        env = ctx.merged_env(step)
        return run_command_step(
            step,
            workspace=ctx.workspace,
            env=env,
            secrets=secret_values(env, ctx.signing_env_names()),
            log_dir=log_dir,
            index=index,
            store=ctx.store,
            now_fn=ctx.now_fn,
        )
    if step.kind == "upload":
        return _run_upload_step(step, ctx, log_dir, index)
    if step.kind == "notify_users":
        return _run_notify_users_step(step, ctx, log_dir, index)
    if step.kind == "notify_team":
        return _run_notify_team_marker(step, ctx, log_dir, index)
    raise ValueError(f"unknown step kind: {step.kind}")


def _internal_result(
    step: StepDef,
    ctx: RunContext,
    log_dir: Path,
    index: int,
    *,
    ok: bool,
    out_text: str,
    err_text: str = "",
    message: str = "",
) -> StepResult:
    started = ctx.now_fn()
    out_path, err_path = _write_log_pair(log_dir, index, out_text, err_text)
    return StepResult(
        name=step.kind,
        kind=step.kind,
        command=step.command,
        status=Status.SUCCESS if ok else Status.FAILED,
        exit_code=0 if ok else 1,  # synthesized for internally dispatched steps
        started_at=started,
        ended_at=ctx.now_fn(),
        stdout_log=_rel(ctx.store, out_path),
        stderr_log=_rel(ctx.store, err_path),
        message=message,
    )


def _run_upload_step(
    step: StepDef, ctx: RunContext, log_dir: Path, index: int
) -> StepResult:
    settings = ctx.settings
    if not settings.distribution_endpoint:
        return _internal_result(
            step, ctx, log_dir, index,
            ok=False, out_text="", err_text="no distribution endpoint configured\n",
            message="no distribution endpoint configured",
        )
    version = f"{ctx.run_number}-{ctx.commit[:8]}"
    api_key = ctx.merged_env(step).get(delivery_mod.API_KEY_ENV)
    try:
        artifact = delivery_mod.collect_artifact(
            ctx.workspace, settings.artifact_glob, kind="release", version_label=version
        )
        receipt = delivery_mod.upload_artifact(
            artifact, settings.distribution_endpoint, api_key
        )
    except ForgeError as exc:
        return _internal_result(
            step, ctx, log_dir, index,
            ok=False, out_text="", err_text=f"{exc}\n", message=str(exc),
        )
    with ctx._mutex:
        ctx.artifact = artifact
        ctx.receipt = receipt
    out_text = (
        f"uploaded {artifact.path.name} ({artifact.size_bytes} bytes)\n"
        f"sha256: {artifact.sha256}\n"
        f"download_url: {receipt.download_url}\n"
    )
    return _internal_result(step, ctx, log_dir, index, ok=True, out_text=out_text)


def _run_notify_users_step(
    step: StepDef, ctx: RunContext, log_dir: Path, index: int
) -> StepResult:
    if not ctx.settings.user_recipients:
        return _internal_result(
            step, ctx, log_dir, index,
            ok=False, out_text="", err_text="no recipients configured\n",
            message="no recipients configured",
        )
    if ctx.receipt is None:
        msg = "no distribution receipt (an upload step must precede notify_users)"
        return _internal_result(
            step, ctx, log_dir, index,
            ok=False, out_text="", err_text=msg + "\n", message=msg,
        )
    try:
        written = delivery_mod.notify_users(
            ctx.settings.user_recipients,
            ctx.receipt,
            ctx.settings.outbox_dir,
            ctx.run_number,
            pipeline_name=pipeline_display_name(ctx.pipeline),
        )
    except OSError as exc:
        msg = f"outbox not writable: {exc}"
        return _internal_result(
            step, ctx, log_dir, index,
            ok=False, out_text="", err_text=msg + "\n", message=msg,
        )
    out_text = "".join(f"wrote {p}\n" for p in written)
    return _internal_result(step, ctx, log_dir, index, ok=True, out_text=out_text)


def _run_notify_team_marker(
    step: StepDef, ctx: RunContext, log_dir: Path, index: int
) -> StepResult:
    # The engine posts the team webhook exactly once per finished run (both
    # outcomes), after the final status is known; the step is a declarative
    # marker in the pipeline document.
    return _internal_result(
        step, ctx, log_dir, index,
        ok=True,
        out_text="team notification is sent once when the run finishes\n",
    )


def _signing_check_result(
    ctx: RunContext, log_dir: Path, index: int
) -> StepResult:
    started = ctx.now_fn()
    decision = verify_signing(
        ctx.pipeline.signing, env=ctx.merged_env(), base_dir=ctx.workspace
    )
    out_text = "signing configuration OK\n" if decision.ok else ""
    err_text = "" if decision.ok else f"{decision.reason}\n"
    out_path, err_path = _write_log_pair(log_dir, index, out_text, err_text)
    return StepResult(
        name="verify-signing",
        kind="signing_check",
        status=Status.SUCCESS if decision.ok else Status.FAILED,
        exit_code=0 if decision.ok else 1,
        started_at=started,
        ended_at=ctx.now_fn(),
        stdout_log=_rel(ctx.store, out_path),
        stderr_log=_rel(ctx.store, err_path),
        message="" if decision.ok else str(decision.reason),
    )


def _execute_serial(stage: SerialStage, ctx: RunContext, log_dir: Path) -> StageResult:
    started = time.monotonic()
    result = StageResult(name=stage.name, status=Status.RUNNING)
    failed_index: int | None = None
    aborted = False
    index = 0

    if stage.requires_signing:
        # Pre-step so a bad signing config is localized to this stage and
        # no build command ever runs without it.
        check = _signing_check_result(ctx, log_dir, index)
        result.steps.append(check)
        if check.status is Status.FAILED:
            failed_index = index
        index += 1

    for step in stage.steps:
        if failed_index is not None:
            result.steps.append(_skipped_step(step, "skipped: earlier step failed"))
        elif aborted:
            result.steps.append(_skipped_step(step, "skipped: run aborted"))
        elif ctx.cancel.is_set():
            aborted = True
            result.steps.append(_skipped_step(step, "skipped: run aborted"))
        elif (
            step.kind == "publish"
            and delivery_mod.publish_decision(ctx.settings.mode)
            == delivery_mod.AWAIT_PROMOTION
        ):
            with ctx._mutex:
                ctx.deferred_publish.append((stage.name, step))
            result.steps.append(_skipped_step(step, "deferred until promotion"))
        else:
            step_result = execute_step(step, ctx, log_dir, index)
            result.steps.append(step_result)
            if step_result.status is Status.FAILED:
                failed_index = index
        index += 1

    if failed_index is not None:
        result.status = Status.FAILED
        result.failing_step = (stage.name, failed_index)
    elif aborted:
        result.status = Status.ABORTED
    else:
        result.status = Status.SUCCESS
    result.duration_ms = int((time.monotonic() - started) * 1000)
    return result


def _execute_group(group: ParallelGroup, ctx: RunContext, log_dir: Path) -> StageResult:
    started = time.monotonic()
    result = StageResult(name=group.name, status=Status.RUNNING)
    # All branches start together and all run to completion: a failing
    # branch does not cancel its siblings.
    with ThreadPoolExecutor(max_workers=len(group.branches)) as pool:
        futures = [
            pool.submit(_execute_serial, branch, ctx, log_dir / _slug(branch.name))
            for branch in group.branches
        ]
        result.branches = [f.result() for f in futures]

    statuses = [b.status for b in result.branches]
    if Status.FAILED in statuses:
        result.status = Status.FAILED
        for branch in result.branches:
            if branch.status is Status.FAILED:
                result.failing_step = branch.failing_step
                break
    elif Status.ABORTED in statuses:
        result.status = Status.ABORTED
    else:
        result.status = Status.SUCCESS
    result.duration_ms = int((time.monotonic() - started) * 1000)
    return result


def _skipped_stage(node: SerialStage | ParallelGroup, message: str) -> StageResult:
    result = StageResult(name=node.name, status=Status.SKIPPED)
    if isinstance(node, SerialStage):
        result.steps = [_skipped_step(s, message) for s in node.steps]
    else:
        for branch in node.branches:
            result.branches.append(
                StageResult(
                    name=branch.name,
                    status=Status.SKIPPED,
                    steps=[_skipped_step(s, message) for s in branch.steps],
                )
            )
    return result


def execute_stage(node: SerialStage | ParallelGroup, ctx: RunContext) -> StageResult:
    log_dir = ctx.log_root / f"{ctx.stage_index:02d}-{_slug(node.name)}"
    if isinstance(node, SerialStage):
        return _execute_serial(node, ctx, log_dir)
    return _execute_group(node, ctx, log_dir)


def execute_run(
    plan: ExecutionPlan, commit: str, trigger: str, ctx: RunContext
) -> RunRecord:
    """Run every plan node in order with cross-stage fail-fast semantics.

    The finished record is persisted through the store before returning,
    and the team webhook (when configured) is posted exactly once.
    """
    record = RunRecord(
        run_number=ctx.run_number,
        commit=commit,
        trigger=trigger,
        mode=plan.mode,
        pipeline_name=pipeline_display_name(ctx.pipeline),
        pipeline_env=dict(ctx.pipeline.environment),
        signing_env_names=ctx.signing_env_names(),
        created_at=ctx.now_fn(),
    )
    started = time.monotonic()
    stop = False
    aborted = False
    for index, node in enumerate(plan.nodes):
        if stop:
            stage_result = _skipped_stage(
                node, "skipped: run aborted" if aborted else "skipped: earlier stage failed"
            )
        else:
            ctx.stage_index = index
            stage_result = execute_stage(node, ctx)
        record.stages.append(stage_result)
        if ctx.progress:
            ctx.progress(node.name, stage_result.status)
        if stage_result.status is Status.FAILED:
            stop = True
        elif stage_result.status is Status.ABORTED:
            stop = True
            aborted = True

    statuses = [s.status for s in record.stages]
    if Status.ABORTED in statuses:
        record.status = Status.ABORTED
    elif Status.FAILED in statuses:
        record.status = Status.FAILED
    else:
        record.status = Status.SUCCESS

    if (
        record.status is Status.SUCCESS
        and plan.mode == "delivery"
        and ctx.deferred_publish
    ):
        record.promotion = Promotion(state=PROMOTION_AWAITING)
        record.publish_steps = [
            {
                "stage": stage_name,
                "kind": step.kind,
                "command": step.command,
                "timeout_seconds": step.timeout_seconds,
                "env": [list(pair) for pair in step.env],
            }
            for stage_name, step in ctx.deferred_publish
        ]

    record.finished_at = ctx.now_fn()
    record.duration_ms = int((time.monotonic() - started) * 1000)
    if ctx.artifact is not None:
        record.artifact = ctx.artifact.to_dict()
    if ctx.receipt is not None:
        record.receipt = ctx.receipt.to_dict()

    if ctx.settings.team_webhook_url:
        warning = delivery_mod.notify_team(ctx.settings.team_webhook_url, record)
        if warning:
            record.warnings.append(warning)

    ctx.store.save_run(record)
    return record


def pipeline_display_name(pipeline: PipelineDef) -> str:
    """Human-facing name: the definition file's stem, or its directory for
    the conventional ``Pipelinefile`` name."""
    path = Path(pipeline.source_name)
    if path.stem and path.stem != "Pipelinefile":
        return path.stem
    parent = path.resolve().parent.name
    return parent or "pipeline"


def build_settings(
    pipeline: PipelineDef,
    store: Store,
    *,
    team_webhook: str | None = None,
    distribution_endpoint: str | None = None,
) -> DeliverySettings:
    """Delivery settings from the pipeline, with explicit overrides applied.

    A relative outbox path is anchored at the store root so messages land
    in durable state, not in a throwaway workspace.
    """
    cfg = pipeline.delivery
    outbox = Path(cfg.outbox_dir)
    if not outbox.is_absolute():
        outbox = store.root / outbox
    return DeliverySettings(
        mode=cfg.mode,
        team_webhook_url=team_webhook or cfg.team_webhook_url,
        user_recipients=cfg.user_recipients,
        outbox_dir=outbox,
        distribution_endpoint=distribution_endpoint or cfg.distribution_endpoint,
        artifact_glob=cfg.artifact_glob,
    )


def run_pipeline(
    pipeline: PipelineDef,
    store: Store,
    *,
    trigger: str = "manual",
    commit: str | None = None,
    head: bool = False,
    env: Mapping[str, str] | None = None,
    cancel: threading.Event | None = None,
    progress: Callable[[str, Status], None] | None = None,
    now_fn: Callable[[], datetime] = _utcnow,
    head_cmd: str | None = None,
    checkout_cmd: str | None = None,
    team_webhook: str | None = None,
    distribution_endpoint: str | None = None,
) -> RunRecord:
    """Allocate a run, prepare its workspace, execute the plan, persist.

    With a pollSCM trigger the watched repository is cloned at the target
    commit (``--head`` semantics when no commit is given); without one the
    run executes in a fresh empty workspace.  Workspace preparation
    failures yield a persisted Aborted record rather than an exception.
    """
    exec_plan = make_plan(pipeline)
    repo = pipeline.triggers[0].repo if pipeline.triggers else None
    branch = pipeline.triggers[0].branch if pipeline.triggers else "master"
    if head and not repo:
        raise ConfigError("--head requires a pollSCM trigger with a repo")

    base_env = dict(env if env is not None else os.environ)
    run_number = store.allocate_run_number()
    workspace = store.workspace_dir(run_number)
    settings = build_settings(
        pipeline,
        store,
        team_webhook=team_webhook,
        distribution_endpoint=distribution_endpoint,
    )

    def aborted_record(message: str) -> RunRecord:
        record = RunRecord(
            run_number=run_number,
            commit=commit or "unknown",
            trigger=trigger,
            mode=exec_plan.mode,
            pipeline_name=pipeline_display_name(pipeline),
            pipeline_env=dict(pipeline.environment),
            status=Status.ABORTED,
            created_at=now_fn(),
            finished_at=now_fn(),
            warnings=[message],
        )
        store.save_run(record)
        return record

    try:
        workspace.mkdir(parents=True, exist_ok=True)
        if repo:
            if commit is None:
                commit = scm.current_head(
                    repo, branch, head_cmd or scm.DEFAULT_HEAD_CMD
                )
            scm.checkout(
                repo, commit, str(workspace), checkout_cmd or scm.DEFAULT_CHECKOUT_CMD
            )
        elif commit is None:
            commit = "manual"
    except (scm.RepoUnreachableError, scm.CheckoutError, OSError) as exc:
        return aborted_record(f"workspace preparation failed: {exc}")

    ctx = RunContext(
        store=store,
        run_number=run_number,
        workspace=workspace,
        pipeline=pipeline,
        settings=settings,
        commit=commit,
        base_env=base_env,
        cancel=cancel or threading.Event(),
        progress=progress,
        now_fn=now_fn,
    )
    return execute_run(exec_plan, commit, trigger, ctx)


def promote_run(
    store: Store,
    run_number: int,
    actor: str,
    *,
    env: Mapping[str, str] | None = None,
    now_fn: Callable[[], datetime] = _utcnow,
) -> RunRecord:
    """Execute a delivery-mode run's deferred publish steps exactly once.

    The whole operation holds the store's writer lock, so concurrent
    promotes (or a promote racing the daemon) serialize; a second promote
    of the same run sees ``promoted`` and raises NothingToPromoteError.
    On a publish failure the run stays ``awaiting``.
    """
    with store.lock():
        record = store.load_run(run_number)
        if record.promotion.state != PROMOTION_AWAITING:
            raise NothingToPromoteError(
                f"run {run_number} is not awaiting promotion "
                f"(state: {record.promotion.state})"
            )
        workspace = store.workspace_dir(run_number)
        if not workspace.is_dir():
            raise PromotionFailedError(
                f"workspace for run {run_number} no longer exists: {workspace}"
            )
        base_env = dict(env if env is not None else os.environ)
        log_dir = store.logs_dir(run_number) / "promote"
        for index, entry in enumerate(record.publish_steps):
            step = StepDef(
                kind=entry.get("kind", "publish"),
                command=entry["command"],
                timeout_seconds=entry.get("timeout_seconds", 1800),
                env=tuple((k, v) for k, v in entry.get("env", [])),
            )
            merged = dict(base_env)
            merged.update(record.pipeline_env)
            merged.update(step.env)
            result = run_command_step(
                step,
                workspace=workspace,
                env=merged,
                secrets=secret_values(merged, record.signing_env_names),
                log_dir=log_dir,
                index=index,
                store=store,
                now_fn=now_fn,
            )
            if result.status is not Status.SUCCESS:
                record.warnings.append(
                    f"promotion attempt by {actor} failed at publish step {index}: "
                    f"{result.message}"
                )
                store.save_run(record)
                raise PromotionFailedError(
                    f"publish step {index} failed: {result.message}"
                )
        record.promotion = Promotion(
            state=PROMOTION_PROMOTED, at=now_fn(), by=actor
        )
        store.save_run(record)
        return record


__all__ = [
    "DeliverySettings",
    "NothingToPromoteError",
    "PromotionFailedError",
    "RunContext",
    "build_settings",
    "execute_run",
    "execute_stage",
    "execute_step",
    "pipeline_display_name",
    "promote_run",
    "run_command_step",
    "run_pipeline",
    "scrub_secrets",
    "secret_values",
]
