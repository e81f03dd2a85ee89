"""Bangla digit glyphs: asset parsing, CGRAM slot residency, display text.

A glyph is 8 rows of 5 pixels (the bottom row is reserved blank for the
cursor line).  The controller has only eight programmable slots for ten
digits, so a small LRU allocator decides which digits are resident and
which slot each one occupies.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .clock import TimeOfDay
from .lcd import PixelCell

GLYPH_ROWS = 8
GLYPH_COLS = 5
SLOT_COUNT = 8
COLON_CODE = 0x3A

_LAYOUTS = ("hms", "smh")


class GlyphAssetError(Exception):
    """Base class for glyph asset format errors."""


class BadDimensions(GlyphAssetError):
    pass


class MissingDigit(GlyphAssetError):
    pass


class DuplicateDigit(GlyphAssetError):
    pass


class NonBlankCursorRow(GlyphAssetError):
    pass


class BlankGlyph(GlyphAssetError):
    pass


class TooManyDigits(Exception):
    """More distinct digits requested than there are slots."""


class NotResident(Exception):
    """A digit needed for display has no CGRAM slot."""


@dataclass(frozen=True)
class Glyph:
    rows: tuple  # 8 ints, low 5 bits used, bit 4 = leftmost pixel

    def __post_init__(self):
        if len(self.rows) != GLYPH_ROWS:
            raise ValueError(f"expected {GLYPH_ROWS} rows, got {len(self.rows)}")
        if any(not (0 <= r <= 0x1F) for r in self.rows):
            raise ValueError("row value out of 5-bit range")

    def lines(self, on: str = "#", off: str = ".") -> tuple:
        return PixelCell(self.rows).lines(on, off)


@dataclass(frozen=True)
class GlyphSet:
    glyphs: tuple  # one Glyph per digit 0..9

    def __post_init__(self):
        if len(self.glyphs) != 10:
            raise ValueError(f"expected 10 glyphs, got {len(self.glyphs)}")


@dataclass(frozen=True)
class SlotMap:
    """Which digit occupies which CGRAM slot, with LRU bookkeeping.

    ``resident`` maps digit -> slot; ``last_used`` maps digit -> stamp of
    the ensure_resident call that last requested it.  Both are stored as
    sorted tuples of pairs so the type stays hashable and comparable.
    """

    resident: tuple = ()
    last_used: tuple = ()
    stamp: int = 0

    def slot_of(self, digit: int) -> int | None:
        for d, s in self.resident:
            if d == digit:
                return s
        return None

    def as_dicts(self) -> tuple:
        return dict(self.resident), dict(self.last_used)


def required_digits(t: TimeOfDay) -> frozenset:
    """The distinct decimal digits needed to show HH:MM:SS."""
    return frozenset(
        d
        for v in (t.hh, t.mm, t.ss)
        for d in (v // 10, v % 10)
    )


def ensure_resident(slotmap: SlotMap, digits) -> tuple:
    """Make every digit in ``digits`` resident; returns (map, loads).

    ``loads`` lists (slot, digit) pairs for digits that had to be loaded,
    in ascending digit order.  Eviction is least-recently-used; ties on
    the usage stamp break toward the lowest slot index.  Digits already
    resident keep their slots.
    """
    digits = frozenset(digits)
    if any(not (0 <= d <= 9) for d in digits):
        raise ValueError("digits must be in 0..9")
    if len(digits) > SLOT_COUNT:
        raise TooManyDigits(f"{len(digits)} digits requested, {SLOT_COUNT} slots")

    resident, last_used = slotmap.as_dicts()
    stamp = slotmap.stamp + 1
    loads = []
    free = sorted(set(range(SLOT_COUNT)) - set(resident.values()))
    for digit in sorted(digits - set(resident)):
        if free:
            slot = free.pop(0)
        else:
            # evict the LRU digit not part of this request
            victim = min(
                (d for d in resident if d not in digits),
                key=lambda d: (last_used.get(d, 0), resident[d]),
            )
            slot = resident.pop(victim)
            last_used.pop(victim, None)
        resident[digit] = slot
        loads.append((slot, digit))
    for digit in digits:
        last_used[digit] = stamp

    new = SlotMap(
        resident=tuple(sorted(resident.items())),
        last_used=tuple(sorted(last_used.items())),
        stamp=stamp,
    )
    return new, loads


def program_cgram(loads, glyphset: GlyphSet) -> list:
    """(rs, byte) controller writes that install the listed loads.

    Each load is one Set-CGRAM-address command plus eight data bytes; a
    final Set-DDRAM-address restores data writes to the display.
    """
    seq = []
    for slot, digit in loads:
        seq.append((0, 0x40 | (slot * 8)))
        seq.extend((1, row) for row in glyphset.glyphs[digit].rows)
    if seq:
        seq.append((0, 0x80))
    return seq


def compose_display(t: TimeOfDay, slotmap: SlotMap, layout: str = "hms") -> list:
    """Character codes for the eight cells of HH:MM:SS (or SS:MM:HH)."""
    if layout not in _LAYOUTS:
        raise ValueError(f"layout must be one of {_LAYOUTS}")
    fields = (t.hh, t.mm, t.ss) if layout == "hms" else (t.ss, t.mm, t.hh)
    codes = []
    for i, value in enumerate(fields):
        if i:
            codes.append(COLON_CODE)
        for digit in (value // 10, value % 10):
            slot = slotmap.slot_of(digit)
            if slot is None:
                raise NotResident(f"digit {digit} has no slot")
            codes.append(slot)
    return codes


def parse_glyph_asset(text: str, *, allow_blank: bool = False) -> GlyphSet:
    """Parse the ``digit N`` / 8x5 bitmap asset format.

    Blank lines between blocks are ignored; inside a block the eight
    bitmap rows must be consecutive.  ``allow_blank`` admits all-blank
    glyphs (useful for fixtures), otherwise they are rejected.
    """
    lines = text.splitlines()
    glyphs = {}
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if not line:
            i += 1
            continue
        parts = line.split()
        if len(parts) != 2 or parts[0] != "digit" or not parts[1].isdigit():
            raise BadDimensions(f"line {i + 1}: expected 'digit N', got {line!r}")
        digit = int(parts[1])
        if not 0 <= digit <= 9:
            raise BadDimensions(f"line {i + 1}: digit {digit} out of range")
        if digit in glyphs:
            raise DuplicateDigit(f"line {i + 1}: digit {digit} defined twice")
        rows = []
        for k in range(GLYPH_ROWS):
            j = i + 1 + k
            row = lines[j] if j < len(lines) else ""
            row = row.rstrip()
            if len(row) != GLYPH_COLS or set(row) - {"#", "."}:
                raise BadDimensions(
                    f"line {j + 1}: digit {digit} row {k} must be "
                    f"{GLYPH_COLS} chars of '#'/'.', got {row!r}"
                )
            rows.append(sum(1 << (4 - c) for c in range(5) if row[c] == "#"))
        if rows[-1] != 0:
            raise NonBlankCursorRow(f"digit {digit}: bottom row must be blank")
        if not any(rows) and not allow_blank:
            raise BlankGlyph(f"digit {digit} is entirely blank")
        glyphs[digit] = Glyph(tuple(rows))
        i += 1 + GLYPH_ROWS
    missing = sorted(set(range(10)) - set(glyphs))
    if missing:
        raise MissingDigit(f"digits missing from asset: {missing}")
    return GlyphSet(tuple(glyphs[d] for d in range(10)))


def serialize_glyph_asset(glyphset: GlyphSet) -> str:
    """Canonical text form: round-trips through parse_glyph_asset."""
    blocks = []
    for digit, glyph in enumerate(glyphset.glyphs):
        lines = [f"digit {digit}"]
        lines.extend(glyph.lines())
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def load_default_glyphs() -> GlyphSet:
    text = (
        resources.files("clocksim")
        .joinpath("assets/bangla_digits.txt")
        .read_text(encoding="utf-8")
    )
    return parse_glyph_asset(text)


def glyph_row_text(glyphset: GlyphSet, digits) -> str:
    """Side-by-side art for a row of digits, same cell format as the LCD."""
    cells = [PixelCell(glyphset.glyphs[d].rows) for d in digits]
    lines = []
    for r in range(GLYPH_ROWS):
        lines.append(" ".join(cell.lines()[r] for cell in cells))
    return "\n".join(lines) + "\n"
