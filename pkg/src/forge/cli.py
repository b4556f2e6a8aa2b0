"""Operator command line: validate, run, daemon, status, history, logs, promote.

Exit codes: 0 success, 1 run or publish failure, 2 configuration/usage
error.  Configuration discovery order is flags, then environment, then
the pipeline file (``FORGE_DISTRIBUTION_ENDPOINT``, ``FORGE_TEAM_WEBHOOK``,
``FORGE_SCM_HEAD_CMD``; the upload API key comes from
``FORGE_DIST_API_KEY`` only).
"""

from __future__ import annotations

import argparse
import os
import signal
import sys
import threading
from pathlib import Path

from forge import daemon as daemon_mod
from forge import executor
from forge.delivery import format_duration
from forge.dsl import PipelineDef, parse_pipeline, validate
from forge.errors import ConfigError
from forge.records import RunRecord, Status
from forge.store import RunNotFoundError, Store

EXIT_OK = 0
EXIT_RUN_FAILED = 1
EXIT_CONFIG = 2

ENDPOINT_ENV = "FORGE_DISTRIBUTION_ENDPOINT"
WEBHOOK_ENV = "FORGE_TEAM_WEBHOOK"
HEAD_CMD_ENV = "FORGE_SCM_HEAD_CMD"


def _plural(n: int, noun: str) -> str:
    return f"{n} {noun}" if n == 1 else f"{n} {noun}s"


def _load_pipeline(path_text: str) -> PipelineDef | int:
    """Parse + validate the pipeline file; on any problem print and exit 2."""
    path = Path(path_text)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnicodeDecodeError as exc:
        print(f"error: {path} is not valid UTF-8: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result = parse_pipeline(text, str(path))
    if result.pipeline is None:
        for diag in result.diagnostics:
            print(diag.render(), file=sys.stderr)
        return EXIT_CONFIG
    diags = validate(result.pipeline)
    if diags:
        for diag in diags:
            print(diag.render(), file=sys.stderr)
        return EXIT_CONFIG
    return result.pipeline


def _resolve(flag_value: str | None, env_name: str, fallback: str | None) -> str | None:
    if flag_value:
        return flag_value
    env_value = os.environ.get(env_name)
    if env_value:
        return env_value
    return fallback


def _stage_line(name: str, status: Status) -> str:
    return f"[stage] {name} ... {status.display()}"


def _print_failing_step(record: RunRecord) -> None:
    for stage in record.stages:
        if stage.failing_step:
            name, index = stage.failing_step
            print(f'FAILED: stage "{name}" step {index}', file=sys.stderr)
            return


# -- subcommands -------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    loaded = _load_pipeline(args.file)
    if isinstance(loaded, int):
        return loaded
    pipeline = loaded
    print(
        f"OK: {_plural(len(pipeline.stages), 'stage')}, "
        f"{_plural(len(pipeline.triggers), 'trigger')}"
    )
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    loaded = _load_pipeline(args.file)
    if isinstance(loaded, int):
        return loaded
    pipeline = loaded
    store = Store(args.store)

    def progress(name: str, status: Status) -> None:
        print(_stage_line(name, status), flush=True)

    try:
        record = executor.run_pipeline(
            pipeline,
            store,
            trigger="manual",
            commit=args.commit,
            head=args.head,
            progress=progress,
            head_cmd=_resolve(args.scm_head_cmd, HEAD_CMD_ENV, None),
            team_webhook=_resolve(args.team_webhook, WEBHOOK_ENV, None),
            distribution_endpoint=_resolve(
                args.distribution_endpoint, ENDPOINT_ENV, None
            ),
        )
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"run #{record.run_number}: {record.status.display()}")
    if record.status is Status.SUCCESS:
        return EXIT_OK
    _print_failing_step(record)
    for warning in record.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return EXIT_RUN_FAILED


def cmd_daemon(args: argparse.Namespace) -> int:
    loaded = _load_pipeline(args.file)
    if isinstance(loaded, int):
        return loaded
    pipeline = loaded
    if not pipeline.triggers:
        print("error: pipeline has no pollSCM trigger", file=sys.stderr)
        return EXIT_CONFIG
    store = Store(args.store)
    stop = threading.Event()

    def handle_signal(signum: int, frame: object) -> None:
        print("daemon: shutting down", flush=True)
        stop.set()

    signal.signal(signal.SIGINT, handle_signal)
    signal.signal(signal.SIGTERM, handle_signal)

    def runner(**kwargs: object) -> RunRecord:
        record = executor.run_pipeline(
            pipeline,
            store,
            head_cmd=_resolve(args.scm_head_cmd, HEAD_CMD_ENV, None),
            team_webhook=_resolve(args.team_webhook, WEBHOOK_ENV, None),
            distribution_endpoint=_resolve(
                args.distribution_endpoint, ENDPOINT_ENV, None
            ),
            **kwargs,  # type: ignore[arg-type]
        )
        print(f"run #{record.run_number}: {record.status.display()}", flush=True)
        return record

    print(
        f"daemon: watching {_plural(len(pipeline.triggers), 'trigger')}, "
        f"store {store.root}",
        flush=True,
    )
    daemon_mod.run_daemon(
        pipeline,
        store,
        stop=stop,
        head_cmd=_resolve(args.scm_head_cmd, HEAD_CMD_ENV, None),
        runner=runner,
    )
    return EXIT_OK


def cmd_status(args: argparse.Namespace) -> int:
    store = Store(args.store)
    record = store.latest_run()
    if record is None:
        print("no runs")
        return EXIT_OK
    print(
        f"run #{record.run_number}  commit {record.commit[:8]}  "
        f"{record.status.display()}  "
        f"({format_duration(record.duration_ms)})  promotion: {record.promotion.state}"
    )
    for stage in record.stages:
        print(_stage_line(stage.name, stage.status))
    return EXIT_OK


def cmd_history(args: argparse.Namespace) -> int:
    store = Store(args.store)
    numbers = store.list_runs()
    if not numbers:
        print("no runs")
        return EXIT_OK
    print(f"{'run':>5}  {'commit':<10}  {'status':<8}  {'duration':>9}  promotion")
    for number in reversed(numbers):
        record = store.load_run(number)
        promo = record.promotion.state
        if record.promotion.state == "promoted" and record.promotion.by:
            promo = f"promoted by {record.promotion.by}"
        print(
            f"{record.run_number:>5}  {record.commit[:10]:<10}  "
            f"{record.status.value:<8}  {format_duration(record.duration_ms):>9}  {promo}"
        )
    return EXIT_OK


def cmd_logs(args: argparse.Namespace) -> int:
    store = Store(args.store)
    try:
        record = store.load_run(args.run_number)
    except RunNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    def find_stage(name: str):
        for stage in record.stages:
            if stage.name == name:
                return stage
            for branch in stage.branches:
                if branch.name == name:
                    return branch
        return None

    stage = find_stage(args.stage)
    if stage is None:
        print(f"error: no stage named {args.stage!r} in run {args.run_number}",
              file=sys.stderr)
        return EXIT_CONFIG
    if not 0 <= args.step < len(stage.steps):
        print(
            f"error: stage {args.stage!r} has {len(stage.steps)} steps; "
            f"index {args.step} out of range",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    step = stage.steps[args.step]
    for log_ref in (step.stdout_log, step.stderr_log):
        if log_ref:
            path = store.root / log_ref
            if path.exists():
                sys.stdout.buffer.write(path.read_bytes())
    sys.stdout.buffer.flush()
    return EXIT_OK


def cmd_promote(args: argparse.Namespace) -> int:
    store = Store(args.store)
    try:
        record = executor.promote_run(store, args.run_number, args.by)
    except RunNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except executor.NothingToPromoteError as exc:
        print(f"nothing to promote: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except executor.PromotionFailedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILED
    promoted_at = record.promotion.at.isoformat() if record.promotion.at else "?"
    print(f"run #{record.run_number} promoted by {record.promotion.by} at {promoted_at}")
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--file", default="Pipelinefile", help="pipeline definition file"
    )
    common.add_argument("--store", default=".forge", help="state directory")
    common.add_argument("--scm-head-cmd", default=None, help=argparse.SUPPRESS)
    common.add_argument("--team-webhook", default=None, help=argparse.SUPPRESS)
    common.add_argument("--distribution-endpoint", default=None, help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(
        prog="forge", description="Hermetic CI/CD pipeline engine"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common]).set_defaults(fn=cmd_validate)

    run_p = sub.add_parser("run", parents=[common])
    target = run_p.add_mutually_exclusive_group()
    target.add_argument("--commit", default=None, help="run a specific revision")
    target.add_argument(
        "--head", action="store_true", help="run the watched branch head"
    )
    run_p.set_defaults(fn=cmd_run)

    sub.add_parser("daemon", parents=[common]).set_defaults(fn=cmd_daemon)
    sub.add_parser("status", parents=[common]).set_defaults(fn=cmd_status)
    sub.add_parser("history", parents=[common]).set_defaults(fn=cmd_history)

    logs_p = sub.add_parser("logs", parents=[common])
    logs_p.add_argument("run_number", type=int)
    logs_p.add_argument("stage")
    logs_p.add_argument("step", type=int)
    logs_p.set_defaults(fn=cmd_logs)

    promote_p = sub.add_parser("promote", parents=[common])
    promote_p.add_argument("run_number", type=int)
    promote_p.add_argument(
        "--by", default=os.environ.get("USER", "operator"), help="actor recorded on the promotion"
    )
    promote_p.set_defaults(fn=cmd_promote)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; keep that contract visible here
        return int(exc.code or 0)
    return args.fn(args)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
