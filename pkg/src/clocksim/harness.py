"""Virtual-time simulation driver for native and interpreted firmware.

All tests and the service speak to one class, :class:`Simulation`, which
advances a deterministic virtual clock, injects scripted button events,
and renders frames when the display changes.  The native mode drives the
clock FSM directly; the interpreted mode runs firmware written in the
BASIC dialect, one scan per ``scan_ms`` of virtual time.

The interpreter is cooperative but not resumable, so interpreted mode
parks it on a worker thread and hands out scans one at a time in strict
lock step; the worker only ever runs between a grant and the next yield,
which keeps the whole arrangement deterministic.
"""

from __future__ import annotations

import queue
import threading
from dataclasses import dataclass

from . import basic
from .clock import (
    AdjustMode,
    Button,
    ButtonEvent,
    ClockFsm,
    Edge,
    TimeOfDay,
    advance,
    on_button,
)
from .glyphs import (
    GlyphSet,
    SlotMap,
    compose_display,
    ensure_resident,
    load_default_glyphs,
    parse_glyph_asset,
    program_cgram,
    required_digits,
)
from .lcd import (
    COLS,
    ROWS,
    LcdState,
    char_code_at,
    lcd_init_4bit,
    lcd_render_screen,
    lcd_reset,
    lcd_write_byte,
)

NATIVE = "native"

_MODES = (
    AdjustMode.RUN,
    AdjustMode.SET_HOUR,
    AdjustMode.SET_MIN,
    AdjustMode.SET_SEC,
)

_BUTTONS = {"set": Button.SET, "inc": Button.INC, "dec": Button.DEC}
_ACTIONS = {"down": Edge.PRESS, "up": Edge.RELEASE}

# ample headroom: the dialect cannot loop without yielding, so fuel only
# guards against absurdly long straight-line programs
_ENGINE_FUEL = 10**15


class ConfigError(Exception):
    pass


class ScriptError(Exception):
    pass


class FirmwareError(Exception):
    pass


@dataclass(frozen=True)
class SimConfig:
    firmware: str = NATIVE  # "native" or a path to a .bas file
    glyph_asset: str | None = None  # None = packaged Bangla digits
    layout: str = "hms"
    speed: float = 0.0  # real-time multiplier; 0 = as fast as possible
    freeze_while_adjusting: bool = True
    scan_ms: int = 100

    def validate(self):
        if self.speed < 0:
            raise ConfigError(f"speed must be >= 0, got {self.speed}")
        if int(self.scan_ms) != self.scan_ms or self.scan_ms < 1:
            raise ConfigError(f"scan_ms must be a positive integer, got {self.scan_ms}")
        if self.layout not in ("hms", "smh"):
            raise ConfigError(f"layout must be hms or smh, got {self.layout!r}")


@dataclass(frozen=True)
class Frame:
    virtual_ms: int
    time: TimeOfDay
    mode: AdjustMode
    cells: tuple  # 2x16 character codes
    pixels: tuple  # 2x16 PixelCell
    art: str


def snapshot(frame: Frame) -> str:
    """Byte-stable text form of a frame: header line plus the ASCII art."""
    return f"T={frame.virtual_ms} {frame.time.text()} mode={frame.mode.value}\n{frame.art}"


def pack_pixels(pixels) -> bytes:
    """Row-major 80x16 bitmask, 10 bytes per pixel row, MSB first."""
    out = bytearray()
    for lcd_row in range(ROWS):
        for r in range(8):
            bits = 0
            for col in range(COLS):
                bits = (bits << 5) | pixels[lcd_row][col].rows[r]
            out += bits.to_bytes(10, "big")
    return bytes(out)


def demo_snapshot(glyphset: GlyphSet) -> str:
    """All ten digit glyphs in display row 0; not reachable on real
    hardware (only eight CGRAM slots), so it is composed from the glyph
    set directly rather than through an LcdState."""
    from .lcd import BLANK_CELL, PixelCell, cells_to_text

    row0 = tuple(PixelCell(g.rows) for g in glyphset.glyphs)
    row0 += (BLANK_CELL,) * (COLS - len(row0))
    grid = (row0, (BLANK_CELL,) * COLS)
    return f"T=0 00:00:00 mode={AdjustMode.RUN.value}\n{cells_to_text(grid)}"


def validate_script(events) -> None:
    """Nondecreasing timestamps and per-button down/up alternation."""
    last_ms = None
    down = set()
    for i, ev in enumerate(events):
        if ev.at_ms < 0:
            raise ScriptError(f"event {i}: negative timestamp {ev.at_ms}")
        if last_ms is not None and ev.at_ms < last_ms:
            raise ScriptError(
                f"event {i}: timestamp {ev.at_ms} after {last_ms}"
            )
        last_ms = ev.at_ms
        if ev.edge is Edge.PRESS:
            if ev.button in down:
                raise ScriptError(
                    f"event {i}: {ev.button.value} down twice without up"
                )
            down.add(ev.button)
        else:
            if ev.button not in down:
                raise ScriptError(f"event {i}: {ev.button.value} up while up")
            down.discard(ev.button)


def parse_button_script(text: str) -> list:
    """Lines of ``<at_ms> <set|inc|dec> <down|up>``; '#' starts a comment."""
    events = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ScriptError(f"line {line_no}: expected 3 fields, got {len(parts)}")
        at_text, button, action = parts
        if not at_text.isdigit():
            raise ScriptError(f"line {line_no}: bad timestamp {at_text!r}")
        if button not in _BUTTONS:
            raise ScriptError(f"line {line_no}: unknown button {button!r}")
        if action not in _ACTIONS:
            raise ScriptError(f"line {line_no}: unknown action {action!r}")
        events.append(ButtonEvent(_BUTTONS[button], _ACTIONS[action], int(at_text)))
    try:
        validate_script(events)
    except ScriptError as err:
        raise ScriptError(str(err)) from None
    return events


def load_button_script(path: str) -> list:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_button_script(fh.read())
    except OSError as err:
        raise ScriptError(f"cannot read script {path}: {err}") from err


def _load_glyphs(config: SimConfig) -> GlyphSet:
    if config.glyph_asset is None:
        return load_default_glyphs()
    try:
        with open(config.glyph_asset, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read glyph asset: {err}") from err
    try:
        return parse_glyph_asset(text)
    except Exception as err:
        raise ConfigError(f"bad glyph asset {config.glyph_asset}: {err}") from err


class _FirmwareEngine:
    """Runs the interpreter on a worker thread, one scan per grant.

    The worker blocks inside its scan hook until the owner grants the
    next scan (or tells it to stop), so the two threads never touch the
    environment at the same time.
    """

    def __init__(self, program: basic.Program, env: basic.Env):
        self.env = env
        self._requests: queue.Queue = queue.Queue()
        self._grants: queue.Queue = queue.Queue()
        self.pending = None  # ("scan"|"wait"|"done"|"error", payload)
        basic.bind_machine(env, scan_hook=self._hook, wait_sink=self._wait)
        self._thread = threading.Thread(
            target=self._main, args=(program,), daemon=True
        )
        self._thread.start()
        self._park()

    def _main(self, program):
        try:
            basic.run(program, self.env, fuel=_ENGINE_FUEL)
            self._requests.put(("done", None))
        except Exception as err:  # surfaced as FirmwareError by the owner
            self._requests.put(("error", err))

    def _hook(self, env) -> bool:
        self._requests.put(("scan", env.scan_counter))
        return self._grants.get()

    def _wait(self, ms):
        self._requests.put(("wait", ms))
        self._grants.get()

    def _park(self):
        self.pending = self._requests.get()
        if self.pending[0] == "error":
            raise FirmwareError(str(self.pending[1])) from self.pending[1]

    def grant_scan(self) -> None:
        assert self.pending[0] == "scan"
        self._grants.put(True)
        self._park()

    def ack_wait(self) -> None:
        assert self.pending[0] == "wait"
        self._grants.put(True)
        self._park()

    def close(self):
        while self.pending[0] in ("scan", "wait"):
            self._grants.put(False)
            try:
                self._park()
            except FirmwareError:
                break
        self._thread.join(timeout=5)


class Simulation:
    """One clock instance: virtual time, firmware, LCD, scripted buttons."""

    def __init__(self, config: SimConfig, script=(), start_time=TimeOfDay(0, 0, 0)):
        config.validate()
        self.config = config
        self.glyphs = _load_glyphs(config)
        events = list(script)
        validate_script(events)
        self._events = events
        self._cursor = 0
        self._t = 0
        self._lcd = lcd_init_4bit(lcd_reset())
        self._levels = {Button.SET: 1, Button.INC: 1, Button.DEC: 1}
        self._last_emit_key = None
        self._engine = None
        if config.firmware == NATIVE:
            self._fsm = ClockFsm(
                time=start_time,
                freeze_while_adjusting=config.freeze_while_adjusting,
            )
            self._slotmap = SlotMap()
            self._sync_residency()
            self._materialize()
        else:
            self._engine = self._boot_firmware(config.firmware)
        self._last_emit_key = self._emit_key()

    # -- construction helpers ------------------------------------------------

    def _boot_firmware(self, path: str) -> _FirmwareEngine:
        try:
            with open(path, encoding="utf-8") as fh:
                source = fh.read()
        except OSError as err:
            raise ConfigError(f"cannot read firmware {path}: {err}") from err
        try:
            program = basic.parse_source(source)
        except (basic.LexError, basic.ParseError) as err:
            raise FirmwareError(f"{path}: {err}") from err

        env = basic.Env()

        def lcd_sink(rs, byte):
            self._lcd = lcd_write_byte(self._lcd, rs, byte)

        basic.bind_machine(env, lcd_sink=lcd_sink)
        return _FirmwareEngine(program, env)

    # -- state access ----------------------------------------------------------

    @property
    def virtual_ms(self) -> int:
        return self._t

    def _current_time_mode(self):
        if self._engine is None:
            return self._fsm.time, self._fsm.mode
        v = self._engine.env.variables
        hh, mm, ss = v.get("hh", 0), v.get("mm", 0), v.get("ss", 0)
        md = v.get("md", 0)
        if not (0 <= hh < 24 and 0 <= mm < 60 and 0 <= ss < 60):
            raise FirmwareError(f"firmware time out of range: {hh}:{mm}:{ss}")
        if not 0 <= md < len(_MODES):
            raise FirmwareError(f"firmware mode out of range: {md}")
        return TimeOfDay(hh, mm, ss), _MODES[md]

    def frame(self) -> Frame:
        time, mode = self._current_time_mode()
        if self._engine is None:
            self._materialize()
        grid, art = lcd_render_screen(self._lcd)
        cells = tuple(
            tuple(char_code_at(self._lcd, r, c) for c in range(COLS))
            for r in range(ROWS)
        )
        return Frame(self._t, time, mode, cells, grid, art)

    # -- native display maintenance -------------------------------------------

    def _sync_residency(self):
        self._slotmap, _ = ensure_resident(
            self._slotmap, required_digits(self._fsm.time)
        )

    def _materialize(self):
        """Write CGRAM + DDRAM for the current native time."""
        loads = [(slot, digit) for digit, slot in self._slotmap.resident]
        loads.sort()
        for rs, byte in program_cgram(loads, self.glyphs):
            self._lcd = lcd_write_byte(self._lcd, rs, byte)
        codes = compose_display(self._fsm.time, self._slotmap, self.config.layout)
        self._lcd = lcd_write_byte(self._lcd, 0, 0x80)
        for code in codes:
            self._lcd = lcd_write_byte(self._lcd, 1, code)

    def _emit_key(self):
        if self._engine is None:
            return (
                self._fsm.time,
                self._fsm.mode,
                self._slotmap.resident,
            )
        return (
            self._engine.env.variables.get("md", 0),
            self._lcd.ddram,
            self._lcd.cgram,
            self._lcd.display_on,
        )

    def _maybe_emit(self, on_frame, every_frame):
        if on_frame is None:
            return
        key = self._emit_key()
        if every_frame or key != self._last_emit_key:
            self._last_emit_key = key
            on_frame(self.frame())

    # -- driving ---------------------------------------------------------------

    def step_to(self, t_target: int, on_frame=None, every_frame=False):
        """Advance virtual time to ``t_target``, applying script events."""
        if t_target < self._t:
            raise ValueError(f"cannot step backwards: {t_target} < {self._t}")
        if self._engine is None:
            self._step_native(t_target, on_frame, every_frame)
        else:
            self._step_interpreted(t_target, on_frame, every_frame)
        self._t = max(self._t, t_target)

    def _step_native(self, t_target, on_frame, every_frame):
        while True:
            next_ev = (
                self._events[self._cursor].at_ms
                if self._cursor < len(self._events)
                else None
            )
            fsm = self._fsm
            ticking = fsm.mode is AdjustMode.RUN or not fsm.freeze_while_adjusting
            next_tick = self._t + 1000 - fsm.ms_accumulator if ticking else None
            stop = t_target
            if next_ev is not None and next_ev <= stop:
                stop = next_ev
            if next_tick is not None and next_tick < stop:
                stop = next_tick
            if stop > self._t:
                self._fsm, seconds = advance(self._fsm, stop - self._t)
                self._t = stop
                if seconds:
                    self._sync_residency()
                    self._maybe_emit(on_frame, every_frame)
            while (
                self._cursor < len(self._events)
                and self._events[self._cursor].at_ms == self._t
            ):
                ev = self._events[self._cursor]
                self._cursor += 1
                self._fsm = on_button(self._fsm, ev)
                self._sync_residency()
                self._maybe_emit(on_frame, every_frame)
            if self._t >= t_target:
                return

    def _step_interpreted(self, t_target, on_frame, every_frame):
        engine = self._engine
        while True:
            kind, payload = engine.pending
            if kind == "done":
                return
            if kind == "wait":
                self._t += payload
                engine.ack_wait()
                self._maybe_emit(on_frame, every_frame)
                continue
            # scan request
            t_next = self._t + self.config.scan_ms
            if t_next > t_target:
                return
            self._t = t_next
            self._apply_events_until(self._t)
            engine.grant_scan()
            self._maybe_emit(on_frame, every_frame)

    def _apply_events_until(self, t):
        while (
            self._cursor < len(self._events)
            and self._events[self._cursor].at_ms <= t
        ):
            ev = self._events[self._cursor]
            self._cursor += 1
            self._levels[ev.button] = 0 if ev.edge is Edge.PRESS else 1
        pins = self._engine.env.pins
        pins[(3, 2)] = self._levels[Button.SET]
        pins[(3, 1)] = self._levels[Button.INC]
        pins[(3, 0)] = self._levels[Button.DEC]

    # -- interactive use (service) ----------------------------------------------

    def press(self, button: str, action: str):
        """Apply one live button edge at the current virtual time."""
        if button not in _BUTTONS or action not in _ACTIONS:
            raise ScriptError(f"unknown button/action: {button} {action}")
        ev = ButtonEvent(_BUTTONS[button], _ACTIONS[action], self._t)
        if self._engine is None:
            self._fsm = on_button(self._fsm, ev)
            self._sync_residency()
        else:
            if self._cursor != len(self._events):
                raise ScriptError("live presses cannot precede scripted events")
            validate_script(self._events + [ev])
            self._events.append(ev)

    def close(self):
        if self._engine is not None:
            self._engine.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def run_headless(
    config: SimConfig,
    script=(),
    duration_ms: int = 0,
    on_frame=None,
    every_frame: bool = False,
    start_time=TimeOfDay(0, 0, 0),
) -> Frame:
    """Run a scripted simulation to its end; returns the final frame."""
    if duration_ms < 0:
        raise ConfigError(f"duration must be >= 0, got {duration_ms}")
    events = list(script)
    for ev in events:
        if ev.at_ms > duration_ms:
            raise ScriptError(
                f"event at {ev.at_ms}ms is beyond the {duration_ms}ms run"
            )
    with Simulation(config, events, start_time=start_time) as sim:
        if on_frame is not None:
            on_frame(sim.frame())
        sim.step_to(duration_ms, on_frame, every_frame)
        return sim.frame()
