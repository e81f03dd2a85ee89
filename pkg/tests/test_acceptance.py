"""Acceptance suite: one test per shipping criterion.

Each test prints a single PASS line on success (visible with -s or -rA);
pytest's own verdict per test is the authoritative pass/fail signal.
Tolerances are pinned in the constants below and in each assertion:
state comparisons are exact, wall-clock budgets are hard limits.
"""

from __future__ import annotations

import pathlib
import random
import time

from fastapi.testclient import TestClient

from clocksim import basic
from clocksim.clock import (
    AdjustMode,
    Button,
    ButtonEvent,
    ClockFsm,
    Edge,
    TimeOfDay,
    on_button,
)
from clocksim.glyphs import (
    SlotMap,
    compose_display,
    ensure_resident,
    load_default_glyphs,
    program_cgram,
    required_digits,
)
from clocksim.harness import SimConfig, Simulation, demo_snapshot, run_headless, snapshot
from clocksim.lcd import (
    LcdState,
    lcd_bus_write,
    lcd_init_4bit,
    lcd_render_cell,
    lcd_reset,
    lcd_write_byte,
)
from clocksim.service import create_app

import support

DAY_MS = 86_400_000
FULL_DAY_BUDGET_S = 60.0
LISTING_BUDGET_S = 60.0
CHECKPOINTS = 1000
LISTING_TRACES = 100
MIN_EVENTS_PER_TRACE = 500
LCD_SEQUENCES = 1000
GLYPH_TIMES = 10_000


def _golden(name: str) -> str:
    path = pathlib.Path(__file__).resolve().parent / "golden" / name
    return path.read_text(encoding="utf-8")


def test_accept_1_full_day_wrap():
    """Native firmware, empty script, 24h of virtual time: ends at
    00:00:00 and matches the modular oracle at 1000 random instants."""
    rng = random.Random(0xDA11)
    checkpoints = sorted(rng.randrange(0, DAY_MS + 1) for _ in range(CHECKPOINTS))
    started = time.perf_counter()
    with Simulation(SimConfig()) as sim:
        for at_ms in checkpoints:
            sim.step_to(at_ms)
            frame = sim.frame()
            want = (at_ms // 1000) % 86400  # oracle: whole seconds mod one day
            got = frame.time.hh * 3600 + frame.time.mm * 60 + frame.time.ss
            assert got == want, f"at {at_ms}ms: shows {frame.time.text()}"
        sim.step_to(DAY_MS)
        final = sim.frame()
    elapsed = time.perf_counter() - started
    assert final.time == TimeOfDay(0, 0, 0)
    assert final.mode is AdjustMode.RUN
    assert elapsed < FULL_DAY_BUDGET_S, f"took {elapsed:.1f}s"
    print(f"ACCEPTANCE 1 full-day wrap: PASS ({elapsed:.1f}s, {CHECKPOINTS} checkpoints)")


def test_accept_2_listing_fidelity():
    """The three shipped adjustment listings parse verbatim and act
    exactly like the clock core on random button traces."""
    started = time.perf_counter()
    for name in ("change_hour.bas", "change_minute.bas", "change_second.bas"):
        program = basic.parse_source(basic.load_firmware_asset(name))
        assert len(program.body) == 1  # one If block wrapping one Do loop
    rng = random.Random(0x5CA9)
    total_events = 0
    for trace_no in range(LISTING_TRACES):
        trace = support.random_trace(rng, scans=900, p_low=0.2)
        events = support.trace_to_events(trace)
        # reroll rare quiet traces so every trace carries >= 500 events
        while len(events) < MIN_EVENTS_PER_TRACE:
            trace = support.random_trace(rng, scans=900, p_low=0.25)
            events = support.trace_to_events(trace)
        total_events += len(events)
        start = (rng.randrange(24), rng.randrange(60), rng.randrange(60))
        got = support.run_listings_on_trace(trace, start)
        want = support.run_fsm_on_trace(trace, start)
        assert got == want, f"trace {trace_no}: listings {got} vs core {want}"
    elapsed = time.perf_counter() - started
    assert elapsed < LISTING_BUDGET_S, f"took {elapsed:.1f}s"
    print(
        f"ACCEPTANCE 2 listing fidelity: PASS ({LISTING_TRACES} traces, "
        f"{total_events} events, {elapsed:.1f}s)"
    )


def test_accept_3_boundary_table():
    """Field wrap table, exact: 23+ -> 0, 0- -> 23, 59+ -> 0, 0- -> 59."""
    table = [
        (AdjustMode.SET_HOUR, TimeOfDay(23, 11, 22), Button.INC, "hh", 0),
        (AdjustMode.SET_HOUR, TimeOfDay(0, 11, 22), Button.DEC, "hh", 23),
        (AdjustMode.SET_MIN, TimeOfDay(5, 59, 22), Button.INC, "mm", 0),
        (AdjustMode.SET_MIN, TimeOfDay(5, 0, 22), Button.DEC, "mm", 59),
        (AdjustMode.SET_SEC, TimeOfDay(5, 11, 59), Button.INC, "ss", 0),
        (AdjustMode.SET_SEC, TimeOfDay(5, 11, 0), Button.DEC, "ss", 59),
    ]
    for mode, start, button, field, expect in table:
        fsm = ClockFsm(time=start, mode=mode)
        fsm = on_button(fsm, ButtonEvent(button, Edge.PRESS, 0))
        fsm = on_button(fsm, ButtonEvent(button, Edge.RELEASE, 1))
        assert getattr(fsm.time, field) == expect, (mode, button)
        others = {"hh", "mm", "ss"} - {field}
        for name in others:
            assert getattr(fsm.time, name) == getattr(start, name)
    print("ACCEPTANCE 3 boundary table: PASS (6/6 exact)")


def test_accept_4_lcd_bus_equivalence():
    """1000 random byte sequences: nibble-split writes and whole-byte
    writes land in identical controller state."""
    rng = random.Random(0x1CD)

    def observe(state: LcdState) -> tuple:
        return (
            state.ddram,
            state.cgram,
            state.addr_counter,
            state.target,
            state.display_on,
            state.cursor_on,
            state.blink_on,
            state.entry_increment,
            state.two_line_mode,
            state.unsupported_commands,
        )

    for seq in range(LCD_SEQUENCES):
        ops = []
        for _ in range(rng.randrange(1, 60)):
            rs = rng.randrange(2)
            byte = rng.randrange(256)
            if rs == 0 and 0x20 <= byte <= 0x3F:
                byte &= ~0x10  # function set: force the 4-bit flag off
            ops.append((rs, byte))
        nib = lcd_init_4bit(lcd_reset())
        byte_path = lcd_init_4bit(lcd_reset())
        for rs, byte in ops:
            nib = lcd_bus_write(nib, rs, byte >> 4)
            nib = lcd_bus_write(nib, rs, byte & 0x0F)
            byte_path = lcd_write_byte(byte_path, rs, byte)
        assert observe(nib) == observe(byte_path), f"sequence {seq} diverged"
    print(f"ACCEPTANCE 4 LCD bus equivalence: PASS ({LCD_SEQUENCES} sequences)")


def test_accept_5_glyph_pipeline():
    """10000 random times: residency always succeeds, display composition
    never errors, and every rendered digit cell equals its asset bitmap."""
    rng = random.Random(0x91F)
    glyphs = load_default_glyphs()
    slotmap = SlotMap()
    lcd = lcd_init_4bit(lcd_reset())
    for _ in range(GLYPH_TIMES):
        t = TimeOfDay(rng.randrange(24), rng.randrange(60), rng.randrange(60))
        slotmap, loads = ensure_resident(slotmap, required_digits(t))
        for rs, byte in program_cgram(loads, glyphs):
            lcd = lcd_write_byte(lcd, rs, byte)
        codes = compose_display(t, slotmap)
        lcd = lcd_write_byte(lcd, 0, 0x80)
        for code in codes:
            lcd = lcd_write_byte(lcd, 1, code)
        digits = [
            t.hh // 10, t.hh % 10, t.mm // 10, t.mm % 10, t.ss // 10, t.ss % 10,
        ]
        for col, digit in zip((0, 1, 3, 4, 6, 7), digits):
            rendered = lcd_render_cell(lcd, 0, col)
            assert rendered.rows == glyphs.glyphs[digit].rows, (t.text(), digit)
    print(f"ACCEPTANCE 5 glyph pipeline: PASS ({GLYPH_TIMES} times)")


def test_accept_6_golden_snapshots():
    """The 00:00:00 clock face and the ten-digit demo screen match the
    frozen goldens byte for byte."""
    face = snapshot(run_headless(SimConfig(), (), 0))
    assert face == _golden("face_00_00_00.txt")
    demo = demo_snapshot(load_default_glyphs())
    assert demo == _golden("ten_digits.txt")
    print("ACCEPTANCE 6 golden snapshots: PASS (2 files, byte-exact)")


def test_accept_7_service_smoke():
    """Serve a simulation, read state, press SET, observe set_hour."""
    app = create_app(SimConfig(speed=10.0))
    with TestClient(app) as client:
        state = client.get("/api/state")
        assert state.status_code == 200
        assert state.json()["mode"] == "run"
        pressed = client.post("/api/button", json={"button": "set", "action": "down"})
        assert pressed.status_code == 204
        after = client.get("/api/state").json()
        assert after["mode"] == "set_hour"
    print("ACCEPTANCE 7 service smoke: PASS")
