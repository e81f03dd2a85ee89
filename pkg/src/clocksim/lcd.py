"""Byte- and pin-level model of a 16x2 HD44780-style character LCD.

The controller state is a value type: every operation returns a new
``LcdState`` and never mutates its argument.  The write-only 4-bit bus
(RS + four data lines) is modelled on top of the byte-level command and
data paths, and rendering turns the 2x16 visible window into 5x8 pixel
cells and deterministic ASCII art.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from . import font5x7

ROWS = 2
COLS = 16
BLANK_CODE = 0x20

_ROW0_START, _ROW0_END = 0x00, 0x27
_ROW1_START, _ROW1_END = 0x40, 0x67
_DDRAM_SIZE = 80
_CGRAM_SIZE = 64


class LcdError(Exception):
    """Base class for LCD protocol errors."""


class MidTransfer(LcdError):
    """A byte-level operation was attempted while a nibble is latched."""


class RsMismatch(LcdError):
    """RS changed between the two nibbles of one 4-bit transfer."""


class Target(Enum):
    DDRAM = "ddram"
    CGRAM = "cgram"


@dataclass(frozen=True)
class PixelCell:
    """One character cell: 8 pixel rows of 5 columns, bit 4 = leftmost."""

    rows: tuple[int, ...]

    def pixel(self, row: int, col: int) -> bool:
        return bool((self.rows[row] >> (4 - col)) & 1)

    def lines(self, on: str = "#", off: str = ".") -> tuple[str, ...]:
        return tuple(
            "".join(on if (r >> (4 - c)) & 1 else off for c in range(5))
            for r in self.rows
        )


BLANK_CELL = PixelCell((0,) * 8)


@dataclass(frozen=True)
class LcdState:
    ddram: bytes
    cgram: bytes
    addr_counter: int
    target: Target
    display_on: bool
    cursor_on: bool
    blink_on: bool
    entry_increment: bool
    two_line_mode: bool
    four_bit_mode: bool
    # (rs, high nibble) present only between the two halves of a transfer
    nibble_latch: tuple[int, int] | None
    unsupported_commands: int


def lcd_reset() -> LcdState:
    """Power-on state: display off, 8-bit interface, blank DDRAM, zero CGRAM."""
    return LcdState(
        ddram=bytes([BLANK_CODE]) * _DDRAM_SIZE,
        cgram=bytes(_CGRAM_SIZE),
        addr_counter=0,
        target=Target.DDRAM,
        display_on=False,
        cursor_on=False,
        blink_on=False,
        entry_increment=True,
        two_line_mode=False,
        four_bit_mode=False,
        nibble_latch=None,
        unsupported_commands=0,
    )


def _ddram_index(addr: int) -> int | None:
    """Map a DDRAM address to the 80-byte store; None for the 0x28-0x3F gap."""
    if _ROW0_START <= addr <= _ROW0_END:
        return addr
    if _ROW1_START <= addr <= _ROW1_END:
        return 40 + addr - _ROW1_START
    return None


def _step_ddram(addr: int, increment: bool) -> int:
    if increment:
        if addr == _ROW0_END:
            return _ROW1_START
        if addr == _ROW1_END:
            return _ROW0_START
        return addr + 1
    if addr == _ROW1_START:
        return _ROW0_END
    if addr == _ROW0_START:
        return _ROW1_END
    return addr - 1


def lcd_command(state: LcdState, byte: int) -> LcdState:
    """Decode and apply one command byte.

    Shift commands and the 0x00 no-op are accepted but only counted, so
    firmware that issues them can be spotted in tests.
    """
    if state.nibble_latch is not None:
        raise MidTransfer("command issued between the two nibbles of a transfer")
    b = byte & 0xFF
    if b & 0x80:  # Set DDRAM address
        addr = b & 0x7F
        if addr > _ROW1_END:
            addr -= _ROW1_END + 1
        return replace(state, addr_counter=addr, target=Target.DDRAM)
    if b & 0x40:  # Set CGRAM address
        return replace(state, addr_counter=b & 0x3F, target=Target.CGRAM)
    if b & 0x20:  # Function set
        return replace(
            state,
            four_bit_mode=not (b & 0x10),
            two_line_mode=bool(b & 0x08),
        )
    if b & 0x10:  # Cursor/display shift: not modelled
        return replace(state, unsupported_commands=state.unsupported_commands + 1)
    if b & 0x08:  # Display on/off control
        return replace(
            state,
            display_on=bool(b & 0x04),
            cursor_on=bool(b & 0x02),
            blink_on=bool(b & 0x01),
        )
    if b & 0x04:  # Entry mode set (the shift bit is not modelled)
        return replace(state, entry_increment=bool(b & 0x02))
    if b & 0x02:  # Return home
        return replace(state, addr_counter=0, target=Target.DDRAM)
    if b & 0x01:  # Clear display; also resets entry mode to increment
        return replace(
            state,
            ddram=bytes([BLANK_CODE]) * _DDRAM_SIZE,
            addr_counter=0,
            target=Target.DDRAM,
            entry_increment=True,
        )
    return replace(state, unsupported_commands=state.unsupported_commands + 1)


def lcd_write_data(state: LcdState, byte: int) -> LcdState:
    """Write one data byte at the address counter and step it."""
    if state.nibble_latch is not None:
        raise MidTransfer("data issued between the two nibbles of a transfer")
    b = byte & 0xFF
    if state.target is Target.CGRAM:
        cg = bytearray(state.cgram)
        cg[state.addr_counter] = b & 0x1F
        step = 1 if state.entry_increment else -1
        return replace(
            state,
            cgram=bytes(cg),
            addr_counter=(state.addr_counter + step) % _CGRAM_SIZE,
        )
    idx = _ddram_index(state.addr_counter)
    dd = state.ddram
    if idx is not None:
        buf = bytearray(dd)
        buf[idx] = b
        dd = bytes(buf)
    return replace(
        state,
        ddram=dd,
        addr_counter=_step_ddram(state.addr_counter, state.entry_increment),
    )


def lcd_bus_write(state: LcdState, rs: int, nibble: int) -> LcdState:
    """One strobe of the 4-bit bus (RS plus data lines D7-D4).

    In 4-bit mode the first strobe latches the high nibble and the second
    composes the byte and dispatches it.  Before 4-bit mode is enabled a
    single strobe carries the high half of a full byte, which is how the
    standard init sequence (0x3, 0x3, 0x3, 0x2) reaches Function Set.
    """
    rs = 1 if rs else 0
    nibble &= 0x0F
    if not state.four_bit_mode:
        byte = nibble << 4
        if rs == 0:
            return lcd_command(state, byte)
        return lcd_write_data(state, byte)
    if state.nibble_latch is None:
        return replace(state, nibble_latch=(rs, nibble))
    latched_rs, high = state.nibble_latch
    if latched_rs != rs:
        raise RsMismatch(f"rs changed from {latched_rs} to {rs} mid-transfer")
    state = replace(state, nibble_latch=None)
    byte = (high << 4) | nibble
    if rs == 0:
        return lcd_command(state, byte)
    return lcd_write_data(state, byte)


def lcd_write_byte(state: LcdState, rs: int, byte: int) -> LcdState:
    """Send a full byte over whichever interface width is active."""
    if state.four_bit_mode:
        state = lcd_bus_write(state, rs, (byte >> 4) & 0x0F)
        return lcd_bus_write(state, rs, byte & 0x0F)
    if rs:
        return lcd_write_data(state, byte)
    return lcd_command(state, byte)


def lcd_init_4bit(state: LcdState) -> LcdState:
    """Standard 4-bit bring-up: function set, display on, entry increment, clear."""
    for nib in (0x3, 0x3, 0x3, 0x2):
        state = lcd_bus_write(state, 0, nib)
    for cmd in (0x28, 0x0C, 0x06, 0x01):
        state = lcd_write_byte(state, 0, cmd)
    return state


def char_code_at(state: LcdState, row: int, col: int) -> int:
    if not (0 <= row < ROWS and 0 <= col < COLS):
        raise ValueError(f"cell ({row}, {col}) outside the 2x16 window")
    return state.ddram[row * 40 + col]


def lcd_render_cell(state: LcdState, row: int, col: int) -> PixelCell:
    """Pixels of one visible cell; CGRAM codes 0x00-0x07, font 0x20-0x7E."""
    if not state.display_on:
        return BLANK_CELL
    code = char_code_at(state, row, col)
    if code <= 0x07:
        base = (code & 0x07) * 8
        return PixelCell(tuple(state.cgram[base : base + 8]))
    rows = font5x7.rows_for(code)
    if rows is None:
        return BLANK_CELL
    return PixelCell(rows)


def cells_to_text(grid) -> str:
    """ASCII art for a 2x16 grid of PixelCells.

    '#' = on, '.' = off, one space between cells, one empty line between
    the two LCD rows, LF line endings; 17 lines, byte-for-byte stable.
    """
    lines = []
    for row_cells in grid:
        cell_lines = [cell.lines() for cell in row_cells]
        for r in range(8):
            lines.append(" ".join(cl[r] for cl in cell_lines))
        lines.append("")
    return "\n".join(lines[:-1]) + "\n"


def lcd_render_screen(state: LcdState):
    """Render all 32 cells; returns (grid, ascii_art)."""
    grid = tuple(
        tuple(lcd_render_cell(state, row, col) for col in range(COLS))
        for row in range(ROWS)
    )
    return grid, cells_to_text(grid)
