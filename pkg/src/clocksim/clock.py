"""Counting and button-adjustment behaviour of the clock as a native FSM.

The FSM is a value type: operations take a ``ClockFsm`` and return a new
one.  Button handling is edge-triggered (one action per press); ticking
is driven by :func:`advance`, which accumulates virtual milliseconds and
applies whole seconds.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

SECONDS_PER_DAY = 24 * 60 * 60


class ClockError(Exception):
    """Base class for event-protocol errors."""


class OutOfOrder(ClockError):
    """An event arrived with a timestamp earlier than its predecessor."""


class ProtocolViolation(ClockError):
    """Press/release alternation was broken for a button."""


class Button(Enum):
    SET = "set"
    INC = "inc"
    DEC = "dec"


class Edge(Enum):
    PRESS = "press"
    RELEASE = "release"


class AdjustMode(Enum):
    RUN = "run"
    SET_HOUR = "set_hour"
    SET_MIN = "set_min"
    SET_SEC = "set_sec"


_MODE_CYCLE = {
    AdjustMode.RUN: AdjustMode.SET_HOUR,
    AdjustMode.SET_HOUR: AdjustMode.SET_MIN,
    AdjustMode.SET_MIN: AdjustMode.SET_SEC,
    AdjustMode.SET_SEC: AdjustMode.RUN,
}

# field adjusted by INC/DEC in each mode, with its modulus
_MODE_FIELD = {
    AdjustMode.SET_HOUR: ("hh", 24),
    AdjustMode.SET_MIN: ("mm", 60),
    AdjustMode.SET_SEC: ("ss", 60),
}


@dataclass(frozen=True)
class TimeOfDay:
    hh: int
    mm: int
    ss: int

    def __post_init__(self):
        if not (0 <= self.hh < 24 and 0 <= self.mm < 60 and 0 <= self.ss < 60):
            raise ValueError(f"time out of range: {self.hh}:{self.mm}:{self.ss}")

    def total_seconds(self) -> int:
        return self.hh * 3600 + self.mm * 60 + self.ss

    @classmethod
    def from_seconds(cls, seconds: int) -> "TimeOfDay":
        s = seconds % SECONDS_PER_DAY
        return cls(s // 3600, (s // 60) % 60, s % 60)

    @classmethod
    def parse(cls, text: str) -> "TimeOfDay":
        parts = text.split(":")
        if len(parts) != 3 or not all(p.isdigit() for p in parts):
            raise ValueError(f"expected HH:MM:SS, got {text!r}")
        return cls(int(parts[0]), int(parts[1]), int(parts[2]))

    def text(self) -> str:
        return f"{self.hh:02d}:{self.mm:02d}:{self.ss:02d}"


@dataclass(frozen=True)
class ButtonEvent:
    button: Button
    edge: Edge
    at_ms: int


def tick_second(t: TimeOfDay) -> TimeOfDay:
    """Add one second with cascaded rollover (ss, then mm, then hh)."""
    ss, mm, hh = t.ss + 1, t.mm, t.hh
    if ss > 59:
        ss = 0
        mm += 1
    if mm > 59:
        mm = 0
        hh += 1
    if hh > 23:
        hh = 0
    return TimeOfDay(hh, mm, ss)


def add_seconds(t: TimeOfDay, n: int) -> TimeOfDay:
    return TimeOfDay.from_seconds(t.total_seconds() + n)


def adjust_field(value: int, delta: int, modulus: int) -> int:
    """One increment/decrement with the firmware's boundary fix-ups.

    The arithmetic is signed: value+delta may reach -1 or the modulus,
    and exactly those two cases are folded back into range.
    """
    result = value + delta
    if result == modulus:
        return 0
    if result == -1:
        return modulus - 1
    return result


@dataclass(frozen=True)
class ClockFsm:
    time: TimeOfDay = TimeOfDay(0, 0, 0)
    mode: AdjustMode = AdjustMode.RUN
    ms_accumulator: int = 0
    freeze_while_adjusting: bool = True
    last_event_ms: int | None = None
    pressed: frozenset = field(default_factory=frozenset)


def on_button(fsm: ClockFsm, ev: ButtonEvent) -> ClockFsm:
    """Apply one button edge.  Only presses act; releases just bookkeep."""
    if fsm.last_event_ms is not None and ev.at_ms < fsm.last_event_ms:
        raise OutOfOrder(f"event at {ev.at_ms}ms after one at {fsm.last_event_ms}ms")
    if ev.edge is Edge.PRESS:
        if ev.button in fsm.pressed:
            raise ProtocolViolation(f"{ev.button.value} pressed twice without release")
        fsm = replace(
            fsm, pressed=fsm.pressed | {ev.button}, last_event_ms=ev.at_ms
        )
    else:
        if ev.button not in fsm.pressed:
            raise ProtocolViolation(f"{ev.button.value} released while not pressed")
        return replace(
            fsm, pressed=fsm.pressed - {ev.button}, last_event_ms=ev.at_ms
        )

    if ev.button is Button.SET:
        return replace(fsm, mode=_MODE_CYCLE[fsm.mode])
    if fsm.mode is AdjustMode.RUN:
        return fsm
    name, modulus = _MODE_FIELD[fsm.mode]
    delta = 1 if ev.button is Button.INC else -1
    value = adjust_field(getattr(fsm.time, name), delta, modulus)
    return replace(fsm, time=replace(fsm.time, **{name: value}))


def advance(fsm: ClockFsm, dt_ms: int) -> tuple[ClockFsm, int]:
    """Advance virtual time; returns (new fsm, whole seconds elapsed).

    While adjusting (and freeze_while_adjusting is on) both the time and
    the millisecond accumulator stay frozen.
    """
    if dt_ms < 0:
        raise ValueError("dt_ms must be >= 0")
    if fsm.mode is not AdjustMode.RUN and fsm.freeze_while_adjusting:
        return fsm, 0
    total = fsm.ms_accumulator + dt_ms
    seconds = total // 1000
    new = replace(
        fsm,
        ms_accumulator=total % 1000,
        time=add_seconds(fsm.time, seconds),
    )
    return new, seconds
