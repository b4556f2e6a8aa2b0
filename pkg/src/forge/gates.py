"""Quality and release gates.

Two independent checks sit between "the build ran" and "the build ships":
the acceptance gate reads the scenario summary a Cucumber-style test
command prints and decides pass/fail from the counts, and the signing
gate verifies keystore material is in place before a release build is
allowed to start.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from forge.dsl.model import SigningConfig

_SUMMARY_LINE = re.compile(r"^\s*(\d+)\s+scenarios?\s*\(([^()]*)\)\s*$")
_SUMMARY_PART = re.compile(r"^\s*(\d+)\s+(failed|passed|pending)\s*$")


@dataclass(frozen=True)
class TestSummary:
    scenarios: int
    passed: int
    failed: int
    pending: int


@dataclass(frozen=True)
class SummaryDiagnostic:
    """Why no usable summary could be extracted."""

    message: str


@dataclass(frozen=True)
class GateDecision:
    ok: bool
    reason: str | None = None


def parse_test_summary(output: str) -> TestSummary | SummaryDiagnostic:
    """Extract the last scenario-summary line from test-command stdout.

    Recognizes ``<N> scenarios (<k> failed, <k> passed, <k> pending)`` with
    any subset of the three categories; absent categories count as zero.
    Total over arbitrary text: never raises.
    """
    last: tuple[int, dict[str, int]] | None = None
    for line in output.splitlines():
        m = _SUMMARY_LINE.match(line)
        if not m:
            continue
        counts: dict[str, int] = {}
        inner = m.group(2).strip()
        parts = inner.split(",") if inner else []
        ok = True
        for part in parts:
            pm = _SUMMARY_PART.match(part)
            if not pm or pm.group(2) in counts:
                ok = False
                break
            counts[pm.group(2)] = int(pm.group(1))
        if ok:
            last = (int(m.group(1)), counts)
    if last is None:
        return SummaryDiagnostic("no test summary line found in output")
    total, counts = last
    summary = TestSummary(
        scenarios=total,
        passed=counts.get("passed", 0),
        failed=counts.get("failed", 0),
        pending=counts.get("pending", 0),
    )
    if summary.passed + summary.failed + summary.pending != summary.scenarios:
        return SummaryDiagnostic(
            f"summary counts are inconsistent: {summary.passed} passed + "
            f"{summary.failed} failed + {summary.pending} pending != {summary.scenarios} scenarios"
        )
    return summary


def acceptance_gate(summary: TestSummary | SummaryDiagnostic) -> GateDecision:
    """Pass iff a summary was parsed, nothing failed, and at least one scenario ran.

    Zero scenarios fail the gate: a silently emptied test suite must not
    look green.
    """
    if isinstance(summary, SummaryDiagnostic):
        return GateDecision(False, summary.message)
    if summary.failed > 0:
        noun = "scenario" if summary.failed == 1 else "scenarios"
        return GateDecision(False, f"{summary.failed} {noun} failed")
    if summary.scenarios == 0:
        return GateDecision(False, "no scenarios ran")
    return GateDecision(True)


def verify_signing(
    cfg: SigningConfig | None,
    env: Mapping[str, str] | None = None,
    *,
    base_dir: Path | str | None = None,
) -> GateDecision:
    """Check release-signing preconditions without touching the environment.

    Passwords are read for presence only and never echoed into the reason
    string.  ``base_dir`` anchors a relative keystore path (defaults to the
    process working directory).
    """
    if env is None:
        env = os.environ
    if cfg is None:
        return GateDecision(False, "no signing configuration in pipeline")
    keystore = Path(cfg.keystore_path)
    if base_dir is not None and not keystore.is_absolute():
        keystore = Path(base_dir) / keystore
    if not keystore.is_file():
        return GateDecision(False, f"keystore not found: {keystore}")
    if not cfg.key_alias:
        return GateDecision(False, "key alias is empty")
    for name in (cfg.store_password_env, cfg.key_password_env):
        if name not in env:
            return GateDecision(False, f"env var {name} not set")
        if not env[name]:
            return GateDecision(False, f"env var {name} is empty")
    return GateDecision(True)
