"""Final-stage effects: artifact upload, team webhook, user outbox messages.

The distribution endpoint receives a multipart POST (``file``, ``version``,
``checksum``) and must answer 2xx with JSON containing a string
``download_url``.  Team notification is a Slack-compatible ``{"text": ...}``
webhook POST.  User notification writes one plain-text message file per
recipient into an outbox directory, standing in for a mailer.
"""

from __future__ import annotations

import hashlib
import os
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

import requests

from forge.errors import ForgeError
from forge.records import RunRecord

UPLOAD_MAX_ATTEMPTS = 3
UPLOAD_BACKOFF_SECONDS = (1.0, 2.0)
API_KEY_ENV = "FORGE_DIST_API_KEY"

RUN_NOW = "run_now"
AWAIT_PROMOTION = "await_promotion"


class MissingArtifactError(ForgeError):
    pass


class AmbiguousArtifactError(ForgeError):
    pass


class UploadFailedError(ForgeError):
    def __init__(self, message: str, attempts: int):
        super().__init__(message)
        self.attempts = attempts


class ProtocolError(ForgeError):
    pass


@dataclass(frozen=True)
class Artifact:
    path: Path
    kind: str  # "debug" | "release"
    sha256: str
    size_bytes: int
    version_label: str

    def to_dict(self) -> dict:
        return {
            "path": str(self.path),
            "kind": self.kind,
            "sha256": self.sha256,
            "size_bytes": self.size_bytes,
            "version_label": self.version_label,
        }


@dataclass(frozen=True)
class DistributionReceipt:
    sha256: str
    download_url: str
    uploaded_at: datetime

    def to_dict(self) -> dict:
        return {
            "sha256": self.sha256,
            "download_url": self.download_url,
            "uploaded_at": self.uploaded_at.isoformat(),
        }


def collect_artifact(
    workspace: Path | str,
    glob_pattern: str,
    kind: str,
    version_label: str,
) -> Artifact:
    """Locate exactly one built file under the workspace and fingerprint it."""
    workspace = Path(workspace)
    matches = sorted(p for p in workspace.glob(glob_pattern) if p.is_file())
    if not matches:
        raise MissingArtifactError(
            f"no file matches {glob_pattern!r} under {workspace}"
        )
    if len(matches) > 1:
        names = ", ".join(str(p.relative_to(workspace)) for p in matches)
        raise AmbiguousArtifactError(
            f"{len(matches)} files match {glob_pattern!r} under {workspace}: {names}"
        )
    path = matches[0]
    data = path.read_bytes()
    return Artifact(
        path=path,
        kind=kind,
        sha256=hashlib.sha256(data).hexdigest(),
        size_bytes=len(data),
        version_label=version_label,
    )


def upload_artifact(
    artifact: Artifact,
    endpoint: str,
    api_key: str | None = None,
    *,
    sleep: Callable[[float], None] = time.sleep,
    timeout: float = 30.0,
) -> DistributionReceipt:
    """POST the artifact to the distribution endpoint.

    Up to three attempts with 1 s / 2 s backoff on connection errors and
    5xx responses.  4xx is permanent: no retry.

    Raises:
        UploadFailedError: non-2xx outcome after the retry budget (or 4xx).
        ProtocolError: 2xx response without a JSON string ``download_url``.
    """
    headers = {}
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    data = artifact.path.read_bytes()
    last_error = ""
    attempts = 0
    for attempt in range(UPLOAD_MAX_ATTEMPTS):
        if attempt > 0:
            sleep(UPLOAD_BACKOFF_SECONDS[attempt - 1])
        attempts = attempt + 1
        try:
            resp = requests.post(
                endpoint,
                files={"file": (artifact.path.name, data, "application/octet-stream")},
                data={"version": artifact.version_label, "checksum": artifact.sha256},
                headers=headers,
                timeout=timeout,
            )
        except requests.RequestException as exc:
            last_error = f"connection error: {exc}"
            continue
        if 200 <= resp.status_code < 300:
            try:
                url = resp.json().get("download_url")
            except ValueError as exc:
                raise ProtocolError(f"endpoint returned non-JSON body: {exc}") from exc
            if not isinstance(url, str) or not url:
                raise ProtocolError("endpoint response is missing 'download_url'")
            return DistributionReceipt(
                sha256=artifact.sha256,
                download_url=url,
                uploaded_at=datetime.now(timezone.utc),
            )
        if 400 <= resp.status_code < 500:
            raise UploadFailedError(
                f"upload rejected with HTTP {resp.status_code} (permanent)", attempts
            )
        last_error = f"HTTP {resp.status_code}"
    raise UploadFailedError(
        f"upload failed after {attempts} attempts: {last_error}", attempts
    )


def format_duration(ms: int) -> str:
    if ms < 90_000:
        return f"{ms / 1000:.1f}s"
    minutes, seconds = divmod(round(ms / 1000), 60)
    return f"{minutes}m {seconds}s"


def notify_team(
    webhook_url: str,
    record: RunRecord,
    *,
    timeout: float = 10.0,
) -> str | None:
    """POST the run outcome to the team webhook.

    Fired exactly once per finished run, success or failure alike.  A
    delivery problem never changes the run's status; the warning text is
    returned for the caller to persist.
    """
    text = (
        f"{record.pipeline_name} #{record.run_number} "
        f"{record.status.display()} after {format_duration(record.duration_ms)}"
    )
    try:
        resp = requests.post(webhook_url, json={"text": text}, timeout=timeout)
    except requests.RequestException as exc:
        return f"team webhook unreachable: {exc}"
    if not 200 <= resp.status_code < 300:
        return f"team webhook returned HTTP {resp.status_code}"
    return None


def notify_users(
    recipients: Sequence[str],
    receipt: DistributionReceipt,
    outbox_dir: Path | str,
    run_number: int,
    *,
    pipeline_name: str = "pipeline",
) -> list[Path]:
    """Write one download-link message per recipient into the outbox.

    Files are named ``<run_number>-<index>.msg`` and written atomically;
    re-running the same run number overwrites in place.
    """
    if not recipients:
        raise ValueError("recipient list is empty")
    outbox = Path(outbox_dir)
    outbox.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for index, recipient in enumerate(recipients, start=1):
        body = (
            f"To: {recipient}\n"
            f"Subject: {pipeline_name} build #{run_number} is ready\n"
            "\n"
            f"A new build is available for testing.\n"
            f"Download: {receipt.download_url}\n"
            f"sha256: {receipt.sha256}\n"
        )
        path = outbox / f"{run_number}-{index}.msg"
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(body, encoding="utf-8")
        os.replace(tmp, path)
        written.append(path)
    return written


def publish_decision(mode: str, record: RunRecord | None = None) -> str:
    """Whether publish steps run inside the run or wait for manual promotion.

    Deployment mode is fully automated; delivery mode defers publishing to
    an explicit promote, a business decision taken outside the engine.
    """
    return RUN_NOW if mode == "deployment" else AWAIT_PROMOTION
