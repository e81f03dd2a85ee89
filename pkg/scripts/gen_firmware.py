#!/usr/bin/env python3
"""Generate the shipped clock firmware from the packaged glyph asset.

The program mirrors the native clock loop: one main-loop pass per scan
(100 ms), a second tick every 10 passes, and one nested adjust loop per
SET stop (hour, minute, second).  Each of the six digit positions owns
one CGRAM slot and reprograms it only when its digit changes, so after
startup the DDRAM layout never moves.

Usage: python3 scripts/gen_firmware.py [output-path]
"""

from __future__ import annotations

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from clocksim import basic
from clocksim.glyphs import load_default_glyphs

DEFAULT_OUT = (
    pathlib.Path(__file__).resolve().parents[1]
    / "src"
    / "clocksim"
    / "assets"
    / "firmware"
    / "bangla_clock.bas"
)

# position slot, last-shown variable, current-digit variable
POSITIONS = (
    (0, "L0", "Da"),
    (1, "L1", "Ta"),
    (2, "L2", "Db"),
    (3, "L3", "Tb"),
    (4, "L4", "Dc"),
    (5, "L5", "Tc"),
)


class Emitter:
    def __init__(self):
        self.lines: list[str] = []

    def put(self, level: int, text: str = ""):
        self.lines.append(("  " * level + text).rstrip())

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def tens_ones(e: Emitter, level: int, src: str, tens: str, ones: str, steps: int):
    """Split src into tens/ones by unrolled subtraction (no division)."""
    e.put(level, f"{ones} = {src}")
    e.put(level, f"{tens} = 0")
    for _ in range(steps):
        e.put(level, f"If {ones} > 9 Then")
        e.put(level + 1, f"{ones} = {ones} - 10")
        e.put(level + 1, f"Incr {tens}")
        e.put(level, "End If")


def defchar_chain(e: Emitter, level: int, slot: int, var: str, rows):
    for digit in range(10):
        row_text = " , ".join(str(r) for r in rows[digit])
        e.put(level, f"If {var} = {digit} Then")
        e.put(level + 1, f"Deflcdchar {slot} , {row_text}")
        e.put(level, "End If")


def render_block(e: Emitter, level: int, rows):
    e.put(level, "' repaint any digit position whose value changed")
    tens_ones(e, level, "Hh", "Da", "Ta", 2)
    tens_ones(e, level, "Mm", "Db", "Tb", 5)
    tens_ones(e, level, "Ss", "Dc", "Tc", 5)
    for slot, last, var in POSITIONS:
        e.put(level, f"If {var} <> {last} Then")
        e.put(level + 1, f"{last} = {var}")
        defchar_chain(e, level + 1, slot, var, rows)
        e.put(level, "End If")


def adjust_loop(e: Emitter, level: int, var: str, wrap: int, rows):
    """One SET stop: +/- adjust var modulo wrap until SET goes low again."""
    e.put(level, "Do")
    body = level + 1
    e.put(body, "If P3.1 = 0 Then")
    e.put(body + 1, f"Incr {var}")
    e.put(body + 1, f"If {var} = {wrap} Then")
    e.put(body + 2, f"{var} = 0")
    e.put(body + 1, "End If")
    e.put(body, "End If")
    e.put(body, "If P3.0 = 0 Then")
    e.put(body + 1, f"Decr {var}")
    e.put(body + 1, f"If {var} = -1 Then")
    e.put(body + 2, f"{var} = {wrap - 1}")
    e.put(body + 1, "End If")
    e.put(body, "End If")
    render_block(e, body, rows)
    e.put(body, "If P3.2 = 0 Then")
    e.put(body + 1, "Exit Loop")
    e.put(body, "End If")
    e.put(level, "Loop")


def generate() -> str:
    rows = [g.rows for g in load_default_glyphs().glyphs]
    e = Emitter()
    e.put(0, "' Bangla digit clock on a 16x2 character LCD")
    e.put(0, "' generated by scripts/gen_firmware.py; edit the generator, not this file")
    e.put(0, "'")
    e.put(0, "' pins (active low): P3.2 = set/mode, P3.1 = plus, P3.0 = minus")
    e.put(0, "' timing: one loop pass per 100 ms scan, 10 passes per second")
    e.put(0, "' Hh/Mm/Ss hold the time, Md the mode: 0 run, 1-3 set hh/mm/ss")
    e.put(0)
    for name in ("Hh", "Mm", "Ss", "Tk", "Md"):
        e.put(0, f"{name} = 0")
    for _, last, _ in POSITIONS:
        e.put(0, f"{last} = -1")
    e.put(0)
    e.put(0, "Cls")
    e.put(0, "Locate 1 , 1")
    e.put(
        0,
        "Lcd Chr(0) ; Chr(1) ; Chr(58) ; Chr(2) ; Chr(3) ; Chr(58) ; Chr(4) ; Chr(5)",
    )
    render_block(e, 0, rows)
    e.put(0)
    e.put(0, "Do")
    e.put(1, "Incr Tk")
    e.put(1, "If Tk = 10 Then")
    e.put(2, "Tk = 0")
    e.put(2, "Incr Ss")
    e.put(2, "If Ss = 60 Then")
    e.put(3, "Ss = 0")
    e.put(3, "Incr Mm")
    e.put(3, "If Mm = 60 Then")
    e.put(4, "Mm = 0")
    e.put(4, "Incr Hh")
    e.put(4, "If Hh = 24 Then")
    e.put(5, "Hh = 0")
    e.put(4, "End If")
    e.put(3, "End If")
    e.put(2, "End If")
    e.put(1, "End If")
    render_block(e, 1, rows)
    e.put(1, "If P3.2 = 0 Then")
    e.put(2, "Md = 1")
    adjust_loop(e, 2, "Hh", 24, rows)
    e.put(2, "Md = 2")
    adjust_loop(e, 2, "Mm", 60, rows)
    e.put(2, "Md = 3")
    adjust_loop(e, 2, "Ss", 60, rows)
    e.put(2, "Md = 0")
    e.put(1, "End If")
    e.put(0, "Loop")
    return e.text()


def main(argv):
    out = pathlib.Path(argv[1]) if len(argv) > 1 else DEFAULT_OUT
    source = generate()
    basic.parse_source(source)  # refuse to write anything the dialect rejects
    out.write_text(source, encoding="utf-8")
    print(f"wrote {out} ({len(source.splitlines())} lines)")


if __name__ == "__main__":
    main(sys.argv)
