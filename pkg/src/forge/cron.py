"""Five-field cron expressions: parsing, minute matching, next occurrence.

Supported syntax per field: ``*``, single values, ranges ``a-b``, lists
``a,b,c`` (elements may themselves be values or ranges), and steps ``*/n``
and ``a-b/n``.  Day-of-week uses 0=Sunday..6=Saturday.  When both the
day-of-month and day-of-week fields are restricted (written as anything
other than ``*``), a day matches if EITHER clause matches; otherwise the
restricted one decides alone.

All arithmetic is done at minute resolution in a single fixed timezone
(callers conventionally pass UTC datetimes); there is no DST handling.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta

from forge.errors import ForgeError

__all__ = [
    "CronSchedule",
    "CronParseError",
    "UnreachableScheduleError",
    "parse_cron",
    "matches",
    "next_after",
]

# (name used in error messages, low, high) in field order
_FIELDS = (
    ("minute", 0, 59),
    ("hour", 0, 23),
    ("day-of-month", 1, 31),
    ("month", 1, 12),
    ("day-of-week", 0, 6),
)

_SEARCH_HORIZON_DAYS = 5 * 366


class CronParseError(ForgeError, ValueError):
    """Malformed cron expression."""


class UnreachableScheduleError(ForgeError):
    """The schedule never fires within the search horizon (e.g. Feb 30)."""


@dataclass(frozen=True)
class CronSchedule:
    """Parsed cron expression as per-field allowed-value sets.

    ``dom_restricted`` / ``dow_restricted`` record whether the source text
    for those fields was anything other than a bare ``*``; the combination
    rule in :func:`matches` depends on them, not on set contents.
    """

    minute: frozenset[int]
    hour: frozenset[int]
    day_of_month: frozenset[int]
    month: frozenset[int]
    day_of_week: frozenset[int]
    dom_restricted: bool
    dow_restricted: bool

    def render(self) -> str:
        """Canonical five-field rendering; parsing it yields an equal schedule."""
        parts = [
            _render_field(self.minute, 0, 59, restricted=None),
            _render_field(self.hour, 0, 23, restricted=None),
            _render_field(self.day_of_month, 1, 31, restricted=self.dom_restricted),
            _render_field(self.month, 1, 12, restricted=None),
            _render_field(self.day_of_week, 0, 6, restricted=self.dow_restricted),
        ]
        return " ".join(parts)

    def __str__(self) -> str:
        return self.render()


def _parse_int(text: str, field: str) -> int:
    try:
        return int(text, 10)
    except ValueError:
        raise CronParseError(f"{field} field has invalid value {text!r}") from None


def _parse_element(element: str, field: str, lo: int, hi: int) -> set[int]:
    """One comma-separated element: value | range | star, optional /step."""
    step = 1
    if "/" in element:
        base, _, step_text = element.partition("/")
        step = _parse_int(step_text, field)
        if step == 0:
            raise CronParseError(f"{field} field has zero step")
        if step < 0:
            raise CronParseError(f"{field} field has negative step")
        if base != "*" and "-" not in base:
            raise CronParseError(
                f"{field} field: step requires '*' or a range, got {element!r}"
            )
    else:
        base = element

    if base == "*":
        start, end = lo, hi
    elif "-" in base:
        pieces = base.split("-")
        if len(pieces) != 2 or not pieces[0] or not pieces[1]:
            raise CronParseError(f"{field} field has invalid range {base!r}")
        start = _parse_int(pieces[0], field)
        end = _parse_int(pieces[1], field)
        if start > end:
            raise CronParseError(f"{field} field has reversed range {base!r}")
    else:
        start = end = _parse_int(base, field)

    for v in (start, end):
        if v < lo or v > hi:
            raise CronParseError(
                f"{field} field out of range: {v} not in {lo}..{hi}"
            )
    return set(range(start, end + 1, step))


def _parse_field(text: str, field: str, lo: int, hi: int) -> frozenset[int]:
    if not text:
        raise CronParseError(f"{field} field is empty")
    values: set[int] = set()
    for element in text.split(","):
        if not element:
            raise CronParseError(f"{field} field has an empty list element")
        values |= _parse_element(element, field, lo, hi)
    return frozenset(values)


def parse_cron(expr: str) -> CronSchedule:
    """Parse a five-field cron expression.

    Raises:
        CronParseError: wrong field count, out-of-range value, zero step,
            reversed range, or other malformed syntax.
    """
    fields = expr.split()
    if len(fields) != 5:
        raise CronParseError(
            f"cron expression must have 5 fields, got {len(fields)}"
        )
    sets = [
        _parse_field(text, name, lo, hi)
        for text, (name, lo, hi) in zip(fields, _FIELDS)
    ]
    return CronSchedule(
        minute=sets[0],
        hour=sets[1],
        day_of_month=sets[2],
        month=sets[3],
        day_of_week=sets[4],
        dom_restricted=fields[2] != "*",
        dow_restricted=fields[4] != "*",
    )


def _day_matches(s: CronSchedule, t: datetime) -> bool:
    dom_ok = t.day in s.day_of_month
    dow_ok = (t.weekday() + 1) % 7 in s.day_of_week  # cron: 0=Sunday
    if s.dom_restricted and s.dow_restricted:
        return dom_ok or dow_ok
    if s.dom_restricted:
        return dom_ok
    if s.dow_restricted:
        return dow_ok
    return True


def matches(s: CronSchedule, t: datetime) -> bool:
    """True iff minute ``t`` fires the schedule.  Sub-minute parts are ignored."""
    return (
        t.minute in s.minute
        and t.hour in s.hour
        and t.month in s.month
        and _day_matches(s, t)
    )


def next_after(s: CronSchedule, t: datetime) -> datetime:
    """Smallest minute strictly after ``t`` that matches ``s``.

    Search is bounded to roughly five years.

    Raises:
        UnreachableScheduleError: nothing fires inside the horizon.
    """
    c = t.replace(second=0, microsecond=0) + timedelta(minutes=1)
    limit = c + timedelta(days=_SEARCH_HORIZON_DAYS)
    hours = sorted(s.hour)
    minutes = sorted(s.minute)
    while c < limit:
        if c.month not in s.month:
            if c.month == 12:
                c = c.replace(year=c.year + 1, month=1, day=1, hour=0, minute=0)
            else:
                c = c.replace(month=c.month + 1, day=1, hour=0, minute=0)
            continue
        if not _day_matches(s, c):
            c = (c + timedelta(days=1)).replace(hour=0, minute=0)
            continue
        if c.hour not in s.hour:
            later = [h for h in hours if h > c.hour]
            if not later:
                c = (c + timedelta(days=1)).replace(hour=0, minute=0)
            else:
                c = c.replace(hour=later[0], minute=0)
            continue
        if c.minute not in s.minute:
            later = [m for m in minutes if m > c.minute]
            if not later:
                c = c.replace(minute=0) + timedelta(hours=1)
            else:
                c = c.replace(minute=later[0])
            continue
        return c
    raise UnreachableScheduleError(
        f"schedule {s.render()!r} does not fire within {_SEARCH_HORIZON_DAYS} days of {t}"
    )


def _render_field(values: frozenset[int], lo: int, hi: int, restricted: bool | None) -> str:
    full = len(values) == hi - lo + 1
    if full and (restricted is None or not restricted):
        return "*"
    runs: list[str] = []
    ordered = sorted(values)
    start = prev = ordered[0]
    for v in ordered[1:]:
        if v == prev + 1:
            prev = v
            continue
        runs.append(str(start) if start == prev else f"{start}-{prev}")
        start = prev = v
    runs.append(str(start) if start == prev else f"{start}-{prev}")
    return ",".join(runs)
