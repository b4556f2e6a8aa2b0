"""Hermetic fixture repositories mirroring the six-block mobile pipeline.

``make_fixture`` generates a local git repository whose Pipelinefile runs
five stages (a parallel install pair, debug build, acceptance tests,
release build, delivery) with deterministic fake commands: the install
scripts emit dependency chatter, the build scripts write fake apk files,
and the test script prints a Cucumber-style summary line.  Scenario
marker files committed into the repo flip individual scripts to failure.

Scripts honour two optional env vars so tests can observe side effects
across throwaway workspaces: ``PUBLISH_LOG`` (the publish command appends
a line per execution) and ``RELEASE_LOG`` (ditto for the release build).
"""

from __future__ import annotations

import os
import stat
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from forge.errors import ForgeError

SCENARIOS = ("all_pass", "acceptance_fail", "release_fail", "no_signing")

STORE_PW_ENV = "FORGE_TEST_STORE_PW"
KEY_PW_ENV = "FORGE_TEST_KEY_PW"

_GIT_IDENTITY = ("-c", "user.name=fixture", "-c", "user.email=fixture@example.com")


class FixtureError(ForgeError):
    pass


@dataclass
class FixtureRepo:
    root: Path
    head: str
    pipelinefile: Path

    def add_commit(self, message: str = "update") -> str:
        """Append a commit touching a counter file; returns the new head."""
        marker = self.root / "CHANGES"
        count = int(marker.read_text()) if marker.exists() else 0
        marker.write_text(f"{count + 1}\n")
        _git(self.root, "add", "-A")
        _git(self.root, "commit", "-q", "-m", message)
        self.head = _git(self.root, "rev-parse", "HEAD").strip()
        return self.head


def _git(cwd: Path, *args: str) -> str:
    proc = subprocess.run(
        ["git", *_GIT_IDENTITY, *args],
        cwd=cwd,
        capture_output=True,
        text=True,
        env={**os.environ, "GIT_CONFIG_GLOBAL": "/dev/null", "GIT_CONFIG_SYSTEM": "/dev/null"},
    )
    if proc.returncode != 0:
        raise FixtureError(f"git {' '.join(args)} failed: {proc.stderr.strip()}")
    return proc.stdout


def _write_script(path: Path, body: str) -> None:
    path.write_text("#!/bin/sh\n" + body, encoding="utf-8")
    path.chmod(path.stat().st_mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)


_BUNDLE_INSTALL = """\
echo "Fetching gem metadata"
echo "Installing calabash-android 0.9.7"
echo "Bundle complete! 4 gems installed."
"""

_NPM_INSTALL = """\
echo "npm install"
echo "added 912 packages in 2s"
"""

_BUILD_DEBUG = """\
echo "gradle assembleDebug"
mkdir -p build/debug
printf 'debug-apk-bytes' > build/debug/app-debug.apk
echo "BUILD SUCCESSFUL"
"""

_RUN_ACCEPTANCE = """\
echo "Feature: teacher listing"
if [ -f FAIL_ACCEPTANCE ]; then
    echo "3 scenarios (1 failed, 2 passed)"
    echo "18 steps (1 failed, 17 passed)"
    exit 1
fi
echo "2 scenarios (2 passed)"
echo "14 steps (14 passed)"
"""

_BUILD_RELEASE = """\
if [ -f FAIL_RELEASE ]; then
    echo "release build exploded" >&2
    exit 1
fi
if [ -n "$RELEASE_LOG" ]; then
    echo "release-build" >> "$RELEASE_LOG"
fi
echo "gradle assembleRelease"
mkdir -p build/release
printf 'release-apk-bytes' > build/release/app-release.apk
echo "BUILD SUCCESSFUL"
"""

_PUBLISH = """\
if [ -n "$PUBLISH_LOG" ]; then
    echo "publish" >> "$PUBLISH_LOG"
fi
echo "published to app store"
"""


def _pipelinefile_text(
    repo: Path,
    *,
    mode: str,
    team_webhook: str | None,
    distribution_endpoint: str | None,
    recipients: Sequence[str],
    outbox_dir: str,
    signing: bool,
) -> str:
    lines = [
        "pipeline {",
        "  triggers {",
        "    pollSCM {",
        '      cron "0 */12 * * 1-5"',
        f'      repo "{repo}"',
        '      branch "master"',
        "    }",
        "  }",
        "  environment {",
        '    APP_ENV "ci"',
        "  }",
        "  delivery {",
        f"    mode {mode}",
    ]
    if team_webhook:
        lines.append(f'    team_webhook "{team_webhook}"')
    if distribution_endpoint:
        lines.append(f'    distribution_endpoint "{distribution_endpoint}"')
        for recipient in recipients:
            lines.append(f'    recipient "{recipient}"')
    lines += [
        f'    outbox "{outbox_dir}"',
        '    artifact "build/release/*.apk"',
        "  }",
    ]
    if signing:
        lines += [
            "  signing {",
            '    keystore "keystore.jks"',
            '    alias "fixture"',
            f'    store_password_env "{STORE_PW_ENV}"',
            f'    key_password_env "{KEY_PW_ENV}"',
            "  }",
        ]
    lines += [
        '  stage "Settings" {',
        "    parallel {",
        '      stage "BUNDLE INSTALL" { sh "./scripts/bundle_install" }',
        '      stage "NPM INSTALL" { sh "./scripts/npm_install" }',
        "    }",
        "  }",
        '  stage "Build Debug Mode" {',
        '    sh "./scripts/build_debug"',
        "  }",
        '  stage "Acceptance Test" {',
        '    sh "./scripts/run_acceptance" { acceptance }',
        "  }",
        '  stage "Build Release Mode" {',
        "    requires_signing",
        '    sh "./scripts/build_release"',
        "  }",
        '  stage "Delivery" {',
    ]
    if distribution_endpoint:
        lines.append("    upload")
        if recipients:
            lines.append("    notify_users")
    if team_webhook:
        lines.append("    notify_team")
    lines += [
        '    publish "./scripts/publish"',
        "  }",
        "}",
        "",
    ]
    return "\n".join(lines)


def make_fixture(
    dest_dir: Path | str,
    scenario: str = "all_pass",
    *,
    mode: str = "delivery",
    team_webhook: str | None = None,
    distribution_endpoint: str | None = None,
    recipients: Sequence[str] = ("qa@example.com", "pm@example.com"),
    outbox_dir: str = "outbox",
) -> FixtureRepo:
    """Generate a fixture repository with one initial commit.

    ``dest_dir`` must be empty or absent.  Webhook and endpoint URLs are
    baked into the Pipelinefile when given (tests start the stub server
    first and pass its URLs in).
    """
    if scenario not in SCENARIOS:
        raise FixtureError(f"unknown scenario {scenario!r}; pick one of {SCENARIOS}")
    dest = Path(dest_dir)
    if dest.exists() and any(dest.iterdir()):
        raise FixtureError(f"fixture destination {dest} is not empty")
    dest.mkdir(parents=True, exist_ok=True)

    scripts = dest / "scripts"
    scripts.mkdir()
    _write_script(scripts / "bundle_install", _BUNDLE_INSTALL)
    _write_script(scripts / "npm_install", _NPM_INSTALL)
    _write_script(scripts / "build_debug", _BUILD_DEBUG)
    _write_script(scripts / "run_acceptance", _RUN_ACCEPTANCE)
    _write_script(scripts / "build_release", _BUILD_RELEASE)
    _write_script(scripts / "publish", _PUBLISH)

    if scenario == "acceptance_fail":
        (dest / "FAIL_ACCEPTANCE").write_text("")
    if scenario == "release_fail":
        (dest / "FAIL_RELEASE").write_text("")
    if scenario != "no_signing":
        (dest / "keystore.jks").write_bytes(b"fixture-keystore")

    pipelinefile = dest / "Pipelinefile"
    pipelinefile.write_text(
        _pipelinefile_text(
            dest.resolve(),
            mode=mode,
            team_webhook=team_webhook,
            distribution_endpoint=distribution_endpoint,
            recipients=tuple(recipients),
            outbox_dir=outbox_dir,
            signing=True,
        ),
        encoding="utf-8",
    )

    _git(dest, "init", "-q")
    _git(dest, "symbolic-ref", "HEAD", "refs/heads/master")
    _git(dest, "add", "-A")
    _git(dest, "commit", "-q", "-m", "initial pipeline fixture")
    head = _git(dest, "rev-parse", "HEAD").strip()
    return FixtureRepo(root=dest, head=head, pipelinefile=pipelinefile)
