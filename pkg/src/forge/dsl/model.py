"""Domain types for the pipeline definition language.

Everything here is immutable after construction and safe to share across
threads.  ``pos`` fields carry (line, column) of the defining token so
later validation passes can point diagnostics back into the source.
"""

from __future__ import annotations

from dataclasses import dataclass, field

MODE_DELIVERY = "delivery"
MODE_DEPLOYMENT = "deployment"
MODES = (MODE_DELIVERY, MODE_DEPLOYMENT)

STEP_KINDS = ("sh", "publish", "notify_team", "notify_users", "upload")
COMMAND_KINDS = ("sh", "publish")

DEFAULT_STEP_TIMEOUT = 1800


@dataclass(frozen=True)
class Diagnostic:
    """A positioned parse/validation finding, rendered ``source:line:col: severity: message``."""

    source: str
    line: int
    col: int
    message: str
    severity: str = "error"

    def render(self) -> str:
        return f"{self.source}:{self.line}:{self.col}: {self.severity}: {self.message}"

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class StepDef:
    kind: str
    command: str = ""
    timeout_seconds: int = DEFAULT_STEP_TIMEOUT
    env: tuple[tuple[str, str], ...] = ()
    acceptance: bool = False  # sh step gated on its test-summary output
    pos: tuple[int, int] = (1, 1)


@dataclass(frozen=True)
class StageDef:
    """A named stage: either a list of steps or one parallel group of branches."""

    name: str
    steps: tuple[StepDef, ...] = ()
    parallel: tuple["StageDef", ...] = ()
    when_mode: str = "always"
    requires_signing: bool = False
    pos: tuple[int, int] = (1, 1)

    @property
    def is_parallel(self) -> bool:
        return bool(self.parallel)


@dataclass(frozen=True)
class TriggerDef:
    cron_expression: str
    repo: str
    branch: str = "master"
    kind: str = "pollSCM"
    pos: tuple[int, int] = (1, 1)


@dataclass(frozen=True)
class DeliveryConfig:
    mode: str = MODE_DELIVERY
    team_webhook_url: str | None = None
    user_recipients: tuple[str, ...] = ()
    outbox_dir: str = "outbox"
    distribution_endpoint: str | None = None
    artifact_glob: str = "**/*.apk"


@dataclass(frozen=True)
class SigningConfig:
    keystore_path: str
    key_alias: str
    store_password_env: str
    key_password_env: str


@dataclass(frozen=True)
class PipelineDef:
    """Parsed pipeline document satisfying all structural invariants."""

    stages: tuple[StageDef, ...]
    triggers: tuple[TriggerDef, ...] = ()
    environment: tuple[tuple[str, str], ...] = ()
    delivery: DeliveryConfig = field(default_factory=DeliveryConfig)
    signing: SigningConfig | None = None
    source_name: str = "<pipeline>"


@dataclass(frozen=True)
class SerialStage:
    name: str
    steps: tuple[StepDef, ...]
    requires_signing: bool = False


@dataclass(frozen=True)
class ParallelGroup:
    name: str
    branches: tuple[SerialStage, ...]


PlanNode = SerialStage | ParallelGroup


@dataclass(frozen=True)
class ExecutionPlan:
    """Flattened, mode-filtered stage list in document order."""

    nodes: tuple[PlanNode, ...]
    mode: str
