"""Execution result records and their JSON wire format (schema 1).

``RunRecord`` is the persistent trace of one pipeline run: per-stage and
per-step statuses, exit codes, timings, the failing-step pointer, and the
promotion state.  Log file paths are stored relative to the store root.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Any

SCHEMA_VERSION = 1


class Status(str, Enum):
    PENDING = "pending"
    RUNNING = "running"
    SUCCESS = "success"
    FAILED = "failed"
    SKIPPED = "skipped"
    ABORTED = "aborted"

    @property
    def terminal(self) -> bool:
        return self in (Status.SUCCESS, Status.FAILED, Status.SKIPPED, Status.ABORTED)

    def display(self) -> str:
        return self.value.upper()


@dataclass
class StepResult:
    name: str
    kind: str
    command: str = ""
    status: Status = Status.PENDING
    exit_code: int | None = None
    timed_out: bool = False
    started_at: datetime | None = None
    ended_at: datetime | None = None
    duration_ms: int = 0
    stdout_log: str | None = None
    stderr_log: str | None = None
    message: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "kind": self.kind,
            "command": self.command,
            "status": self.status.value,
            "exit_code": self.exit_code,
            "timed_out": self.timed_out,
            "started_at": _dt_out(self.started_at),
            "ended_at": _dt_out(self.ended_at),
            "duration_ms": self.duration_ms,
            "stdout_log": self.stdout_log,
            "stderr_log": self.stderr_log,
            "message": self.message,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "StepResult":
        return cls(
            name=d["name"],
            kind=d["kind"],
            command=d.get("command", ""),
            status=Status(d["status"]),
            exit_code=d.get("exit_code"),
            timed_out=d.get("timed_out", False),
            started_at=_dt_in(d.get("started_at")),
            ended_at=_dt_in(d.get("ended_at")),
            duration_ms=d.get("duration_ms", 0),
            stdout_log=d.get("stdout_log"),
            stderr_log=d.get("stderr_log"),
            message=d.get("message", ""),
        )


@dataclass
class StageResult:
    name: str
    status: Status = Status.PENDING
    steps: list[StepResult] = field(default_factory=list)
    branches: list["StageResult"] = field(default_factory=list)
    failing_step: tuple[str, int] | None = None
    duration_ms: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "status": self.status.value,
            "steps": [s.to_dict() for s in self.steps],
            "branches": [b.to_dict() for b in self.branches],
            "failing_step": list(self.failing_step) if self.failing_step else None,
            "duration_ms": self.duration_ms,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "StageResult":
        failing = d.get("failing_step")
        return cls(
            name=d["name"],
            status=Status(d["status"]),
            steps=[StepResult.from_dict(s) for s in d.get("steps", [])],
            branches=[StageResult.from_dict(b) for b in d.get("branches", [])],
            failing_step=(failing[0], failing[1]) if failing else None,
            duration_ms=d.get("duration_ms", 0),
        )


PROMOTION_NOT_APPLICABLE = "not_applicable"
PROMOTION_AWAITING = "awaiting"
PROMOTION_PROMOTED = "promoted"


@dataclass
class Promotion:
    state: str = PROMOTION_NOT_APPLICABLE
    at: datetime | None = None
    by: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"state": self.state, "at": _dt_out(self.at), "by": self.by}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Promotion":
        return cls(state=d["state"], at=_dt_in(d.get("at")), by=d.get("by"))


@dataclass
class RunRecord:
    run_number: int
    commit: str
    trigger: str  # "poll" | "manual"
    mode: str
    pipeline_name: str = "pipeline"
    pipeline_env: dict[str, str] = field(default_factory=dict)
    stages: list[StageResult] = field(default_factory=list)
    status: Status = Status.RUNNING
    promotion: Promotion = field(default_factory=Promotion)
    created_at: datetime | None = None
    finished_at: datetime | None = None
    duration_ms: int = 0
    # publish steps deferred for manual promotion, as [stage, step dict]
    publish_steps: list[dict[str, Any]] = field(default_factory=list)
    # env-var names holding signing passwords; promote scrubs these too
    signing_env_names: list[str] = field(default_factory=list)
    artifact: dict[str, Any] | None = None
    receipt: dict[str, Any] | None = None
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": SCHEMA_VERSION,
            "run_number": self.run_number,
            "commit": self.commit,
            "trigger": self.trigger,
            "mode": self.mode,
            "pipeline_name": self.pipeline_name,
            "pipeline_env": dict(self.pipeline_env),
            "stages": [s.to_dict() for s in self.stages],
            "status": self.status.value,
            "promotion": self.promotion.to_dict(),
            "created_at": _dt_out(self.created_at),
            "finished_at": _dt_out(self.finished_at),
            "duration_ms": self.duration_ms,
            "publish_steps": self.publish_steps,
            "signing_env_names": list(self.signing_env_names),
            "artifact": self.artifact,
            "receipt": self.receipt,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunRecord":
        return cls(
            run_number=d["run_number"],
            commit=d["commit"],
            trigger=d["trigger"],
            mode=d["mode"],
            pipeline_name=d.get("pipeline_name", "pipeline"),
            pipeline_env=dict(d.get("pipeline_env", {})),
            stages=[StageResult.from_dict(s) for s in d.get("stages", [])],
            status=Status(d["status"]),
            promotion=Promotion.from_dict(d["promotion"]),
            created_at=_dt_in(d.get("created_at")),
            finished_at=_dt_in(d.get("finished_at")),
            duration_ms=d.get("duration_ms", 0),
            publish_steps=list(d.get("publish_steps", [])),
            signing_env_names=list(d.get("signing_env_names", [])),
            artifact=d.get("artifact"),
            receipt=d.get("receipt"),
            warnings=list(d.get("warnings", [])),
        )


def _dt_out(dt: datetime | None) -> str | None:
    return dt.isoformat() if dt else None


def _dt_in(text: str | None) -> datetime | None:
    return datetime.fromisoformat(text) if text else None
