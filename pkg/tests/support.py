"""Shared helpers: the scan-trace convention used by the differential tests.

A trace is a list of per-scan levels (set, inc, dec), active-low, one
entry per scan tick; scan 0 must be all-released because the firmware's
main loop yields before its first poll.  The same trace drives both
sides of the comparison:

* interpreted: a scan hook feeds levels to P3.2/P3.1/P3.0 by scan index;
* native: each low level at scan s becomes one press+release pair at
  t=s, presses ordered INC, DEC, SET (the firmware's poll order).
"""

import random

from clocksim import basic
from clocksim.clock import Button, ButtonEvent, ClockFsm, Edge, on_button

RELEASED = (1, 1, 1)  # (set, inc, dec)


def combined_listing_program() -> basic.Program:
    """The three adjustment listings wrapped in the firmware main loop."""
    source = "Do\n" + "".join(
        basic.load_firmware_asset(name)
        for name in ("change_hour.bas", "change_minute.bas", "change_second.bas")
    ) + "Loop\n"
    return basic.parse_source(source)


def random_trace(rng: random.Random, scans: int, p_low: float = 0.2) -> list:
    trace = [RELEASED]
    for _ in range(scans):
        trace.append(tuple(0 if rng.random() < p_low else 1 for _ in range(3)))
    return trace


def trace_to_events(trace) -> list:
    """Press+release pairs per low scan, poll order INC, DEC, SET."""
    events = []
    for s in range(1, len(trace)):
        set_level, inc_level, dec_level = trace[s]
        lows = []
        if inc_level == 0:
            lows.append(Button.INC)
        if dec_level == 0:
            lows.append(Button.DEC)
        if set_level == 0:
            lows.append(Button.SET)
        for b in lows:
            events.append(ButtonEvent(b, Edge.PRESS, s))
        for b in lows:
            events.append(ButtonEvent(b, Edge.RELEASE, s))
    return events


def run_listings_on_trace(trace, start=(0, 0, 0)) -> tuple:
    """Final (Hh, Mm, Ss) after interpreting the combined listings."""
    program = combined_listing_program()
    env = basic.Env()
    env.variables.update(hh=start[0], mm=start[1], ss=start[2])
    _apply_levels(env, trace[0])

    def hook(e):
        if e.scan_counter >= len(trace):
            return False
        _apply_levels(e, trace[e.scan_counter])
        return True

    basic.bind_machine(env, scan_hook=hook)
    env = basic.run(program, env, fuel=10_000 + 200 * len(trace))
    v = env.variables
    return (v.get("hh", 0), v.get("mm", 0), v.get("ss", 0))


def run_fsm_on_trace(trace, start=(0, 0, 0)) -> tuple:
    """Final (hh, mm, ss) after feeding the equivalent events to the FSM."""
    from clocksim.clock import TimeOfDay

    fsm = ClockFsm(time=TimeOfDay(*start))
    for ev in trace_to_events(trace):
        fsm = on_button(fsm, ev)
    return (fsm.time.hh, fsm.time.mm, fsm.time.ss)


def _apply_levels(env, levels):
    set_level, inc_level, dec_level = levels
    env.pins[(3, 2)] = set_level
    env.pins[(3, 1)] = inc_level
    env.pins[(3, 0)] = dec_level
