"""Polling daemon: wake at cron-matching minutes, poll, run on new commits.

The clock is injectable so tests can drive a simulated week in
milliseconds; the wall clock implementation sleeps until the next cron
tick on an interruptible event.  Polling of a given repository is
strictly serial — a new poll never starts while a run is in flight,
because the loop itself executes runs synchronously.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Callable, Protocol

from forge import scm
from forge.cron import CronSchedule, next_after, parse_cron
from forge.dsl import PipelineDef, TriggerDef
from forge.errors import ConfigError
from forge.records import RunRecord
from forge.store import Store

logger = logging.getLogger(__name__)


class Clock(Protocol):
    def now(self) -> datetime: ...

    def wait_until(self, t: datetime, stop: threading.Event) -> None:
        """Block until ``t`` or until ``stop`` is set, whichever is first."""


class SystemClock:
    def now(self) -> datetime:
        return datetime.now(timezone.utc)

    def wait_until(self, t: datetime, stop: threading.Event) -> None:
        remaining = (t - self.now()).total_seconds()
        if remaining > 0:
            stop.wait(timeout=remaining)


@dataclass
class SimulatedClock:
    """Test clock: time advances instantly, firing scheduled side effects.

    ``events`` holds (when, callback) pairs, e.g. "a commit lands Monday
    10:00"; each callback fires once as simulated time passes it.
    """

    current: datetime
    events: list[tuple[datetime, Callable[[], None]]] = field(default_factory=list)

    def now(self) -> datetime:
        return self.current

    def schedule(self, when: datetime, callback: Callable[[], None]) -> None:
        self.events.append((when, callback))
        self.events.sort(key=lambda pair: pair[0])

    def wait_until(self, t: datetime, stop: threading.Event) -> None:
        while self.events and self.events[0][0] <= t:
            when, callback = self.events.pop(0)
            self.current = max(self.current, when)
            callback()
        self.current = max(self.current, t)


@dataclass
class _Watch:
    trigger: TriggerDef
    schedule: CronSchedule
    next_tick: datetime


def run_daemon(
    pipeline: PipelineDef,
    store: Store,
    *,
    clock: Clock | None = None,
    stop: threading.Event | None = None,
    until: datetime | None = None,
    head_cmd: str | None = None,
    runner: Callable[..., RunRecord] | None = None,
    on_tick: Callable[[datetime], None] | None = None,
) -> list[RunRecord]:
    """Poll loop over the pipeline's triggers; returns the runs it started.

    ``runner(commit=..., trigger="poll", cancel=..., now_fn=...)`` performs
    one run; the CLI wires it to :func:`forge.executor.run_pipeline`.
    ``until`` bounds the loop for tests; interactive use runs until
    ``stop`` is set.
    """
    if not pipeline.triggers:
        raise ConfigError("pipeline has no pollSCM trigger; nothing to poll")
    if runner is None:
        raise ValueError("run_daemon needs a runner callable")
    clock = clock or SystemClock()
    stop = stop or threading.Event()
    cmd = head_cmd or scm.DEFAULT_HEAD_CMD

    watches = []
    for trigger in pipeline.triggers:
        schedule = parse_cron(trigger.cron_expression)
        watches.append(
            _Watch(trigger, schedule, next_after(schedule, clock.now()))
        )

    records: list[RunRecord] = []
    while not stop.is_set():
        tick = min(w.next_tick for w in watches)
        if until is not None and tick > until:
            break
        clock.wait_until(tick, stop)
        if stop.is_set():
            break
        if on_tick:
            on_tick(tick)
        for watch in watches:
            if watch.next_tick != tick:
                continue
            watch.next_tick = next_after(watch.schedule, tick)
            trigger = watch.trigger
            try:
                head = scm.current_head(trigger.repo, trigger.branch, cmd)
            except scm.RepoUnreachableError as exc:
                logger.warning("poll failed, will retry next tick: %s", exc)
                continue
            state = store.load_poll_state(trigger.repo, trigger.branch)
            if scm.should_trigger(state, head):
                logger.info("new commit %s on %s; starting run", head[:8], trigger.repo)
                records.append(
                    runner(commit=head, trigger="poll", cancel=stop, now_fn=clock.now)
                )
            store.save_poll_state(scm.record_poll(state, head, tick))
            if stop.is_set():
                break
    return records
