"""Watched-repository polling: head queries, trigger decisions, poll state.

Head detection shells out to a configurable command template instead of
embedding a VCS client, so tests run against throwaway local fixture
repositories and deployments can swap in whatever client they use.
"""

from __future__ import annotations

import shlex
import subprocess
from dataclasses import dataclass, replace
from datetime import datetime

from forge.errors import ForgeError

DEFAULT_HEAD_CMD = "git -C {repo} rev-parse {branch}"
DEFAULT_CHECKOUT_CMD = (
    "git clone -q {repo} {dest} && git -C {dest} checkout -q {commit}"
)

_COMMAND_TIMEOUT = 120


class RepoUnreachableError(ForgeError):
    """Head query failed; carries the command's captured stderr."""

    def __init__(self, repo: str, stderr: str):
        super().__init__(f"repository unreachable: {repo}: {stderr.strip()}")
        self.repo = repo
        self.stderr = stderr


class CheckoutError(ForgeError):
    """Workspace checkout command failed."""


@dataclass(frozen=True)
class PollState:
    repo: str
    branch: str
    last_seen_commit: str | None = None
    last_poll_at: datetime | None = None


def current_head(repo: str, branch: str, head_cmd: str = DEFAULT_HEAD_CMD) -> str:
    """Resolve the current commit id of ``branch`` in ``repo``.

    The template's ``{repo}``/``{branch}`` placeholders are substituted
    shell-quoted and the command runs under the platform shell; the
    trimmed first output line is the commit id.
    """
    cmd = head_cmd.format(repo=shlex.quote(repo), branch=shlex.quote(branch))
    proc = subprocess.run(
        cmd,
        shell=True,
        capture_output=True,
        text=True,
        timeout=_COMMAND_TIMEOUT,
    )
    if proc.returncode != 0:
        raise RepoUnreachableError(repo, proc.stderr)
    head = proc.stdout.splitlines()[0].strip() if proc.stdout.strip() else ""
    if not head:
        raise RepoUnreachableError(repo, "head command produced no output")
    return head


def should_trigger(state: PollState, head: str) -> bool:
    """True iff ``head`` is new: no commit seen yet (bootstrap) or id changed.

    Rewritten history counts as new; id inequality is the only test.
    """
    if not head:
        raise ValueError("head commit id must be non-empty")
    return state.last_seen_commit is None or state.last_seen_commit != head


def record_poll(state: PollState, head: str, t: datetime) -> PollState:
    """Pure state update after a poll; persistence belongs to the store."""
    return replace(state, last_seen_commit=head, last_poll_at=t)


def checkout(
    repo: str,
    commit: str,
    dest: str,
    checkout_cmd: str = DEFAULT_CHECKOUT_CMD,
) -> None:
    """Materialize ``commit`` of ``repo`` into the empty directory ``dest``."""
    cmd = checkout_cmd.format(
        repo=shlex.quote(repo), commit=shlex.quote(commit), dest=shlex.quote(dest)
    )
    proc = subprocess.run(
        cmd,
        shell=True,
        capture_output=True,
        text=True,
        timeout=_COMMAND_TIMEOUT,
    )
    if proc.returncode != 0:
        raise CheckoutError(
            f"checkout of {commit} from {repo} failed: {proc.stderr.strip()}"
        )
