"""Durable on-disk state: run history, step logs, poll state, run numbering.

Layout under the store root::

    counter                      monotonic run-number allocator
    lock                         advisory single-writer lock file
    runs/<n>/record.json         RunRecord, schema-versioned JSON
    runs/<n>/logs/<stage>/...    raw per-step log files
    runs/<n>/workspace/          fresh checkout the run executed in
    poll/<repo-hash>.json        last seen commit / poll time per repo+branch

All writes are temp-file + rename, so readers never observe a
half-written record.  Writer sections take the advisory lock; the lock is
reentrant within a process and exclusive across processes.
"""

from __future__ import annotations

import fcntl
import hashlib
import json
import logging
import threading
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import IO, Iterator

from forge.errors import ForgeError
from forge.records import RunRecord
from forge.scm import PollState

logger = logging.getLogger(__name__)


class RunNotFoundError(ForgeError):
    pass


class CorruptRecordError(ForgeError):
    pass


class Store:
    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "runs").mkdir(exist_ok=True)
        (self.root / "poll").mkdir(exist_ok=True)
        self._tlock = threading.RLock()
        self._lock_depth = 0
        self._lock_fh: IO[bytes] | None = None

    # -- locking -------------------------------------------------------

    @contextmanager
    def lock(self) -> Iterator[None]:
        """Single-writer advisory lock; reentrant in-process, flock across processes."""
        self._tlock.acquire()
        try:
            if self._lock_depth == 0:
                self._lock_fh = open(self.root / "lock", "ab")
                fcntl.flock(self._lock_fh, fcntl.LOCK_EX)
            self._lock_depth += 1
            yield
        finally:
            self._lock_depth -= 1
            if self._lock_depth == 0 and self._lock_fh is not None:
                fcntl.flock(self._lock_fh, fcntl.LOCK_UN)
                self._lock_fh.close()
                self._lock_fh = None
            self._tlock.release()

    def _write_atomic(self, path: Path, data: bytes) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_bytes(data)
        tmp.replace(path)

    # -- run numbering ---------------------------------------------------

    def allocate_run_number(self) -> int:
        """Next run number; strictly increasing, never handed out twice."""
        with self.lock():
            counter = self.root / "counter"
            current = 0
            if counter.exists():
                current = int(counter.read_text().strip() or "0")
            n = current + 1
            self._write_atomic(counter, f"{n}\n".encode())
            return n

    # -- run records -------------------------------------------------------

    def run_dir(self, number: int) -> Path:
        return self.root / "runs" / str(number)

    def logs_dir(self, number: int) -> Path:
        return self.run_dir(number) / "logs"

    def workspace_dir(self, number: int) -> Path:
        return self.run_dir(number) / "workspace"

    def record_path(self, number: int) -> Path:
        return self.run_dir(number) / "record.json"

    def save_run(self, record: RunRecord) -> None:
        payload = json.dumps(record.to_dict(), indent=2).encode()
        with self.lock():
            self._write_atomic(self.record_path(record.run_number), payload)

    def load_run(self, number: int) -> RunRecord:
        path = self.record_path(number)
        if not path.exists():
            raise RunNotFoundError(f"run {number} not found in {self.root}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            return RunRecord.from_dict(data)
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptRecordError(f"corrupt record for run {number}: {exc}") from exc

    def list_runs(self) -> list[int]:
        out = []
        for entry in (self.root / "runs").iterdir():
            if entry.is_dir() and entry.name.isdigit():
                out.append(int(entry.name))
        return sorted(out)

    def latest_run(self) -> RunRecord | None:
        numbers = self.list_runs()
        return self.load_run(numbers[-1]) if numbers else None

    # -- poll state ---------------------------------------------------

    def _poll_path(self, repo: str, branch: str) -> Path:
        digest = hashlib.sha256(f"{repo}\n{branch}".encode()).hexdigest()[:16]
        return self.root / "poll" / f"{digest}.json"

    def save_poll_state(self, state: PollState) -> None:
        payload = json.dumps(
            {
                "repo": state.repo,
                "branch": state.branch,
                "last_seen_commit": state.last_seen_commit,
                "last_poll_at": state.last_poll_at.isoformat()
                if state.last_poll_at
                else None,
            },
            indent=2,
        ).encode()
        with self.lock():
            self._write_atomic(self._poll_path(state.repo, state.branch), payload)

    def load_poll_state(self, repo: str, branch: str) -> PollState:
        """Stored state, or an empty bootstrap state when absent.

        A corrupt file is treated as empty with a logged warning: failing
        open re-triggers a run rather than wedging the poller.
        """
        path = self._poll_path(repo, branch)
        if not path.exists():
            return PollState(repo=repo, branch=branch)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            last_poll = data.get("last_poll_at")
            return PollState(
                repo=repo,
                branch=branch,
                last_seen_commit=data.get("last_seen_commit"),
                last_poll_at=datetime.fromisoformat(last_poll) if last_poll else None,
            )
        except (ValueError, KeyError, TypeError) as exc:
            logger.warning("corrupt poll state %s (%s); treating as empty", path, exc)
            return PollState(repo=repo, branch=branch)
