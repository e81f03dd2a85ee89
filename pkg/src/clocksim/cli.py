"""Command line entry points: run, serve, render.

Exit codes: 0 on success, 2 for configuration or script problems,
3 for firmware problems.
"""

from __future__ import annotations

import argparse
import pathlib
import sys
import time

from .clock import TimeOfDay
from .harness import (
    NATIVE,
    ConfigError,
    FirmwareError,
    ScriptError,
    SimConfig,
    Simulation,
    load_button_script,
    run_headless,
    snapshot,
)


def _add_config_flags(parser: argparse.ArgumentParser, default_speed: float):
    parser.add_argument(
        "--firmware",
        default=NATIVE,
        metavar="NATIVE|FILE.BAS",
        help="'native' for the built-in clock, or a firmware source file",
    )
    parser.add_argument(
        "--glyphs",
        default=None,
        metavar="FILE",
        help="digit glyph asset (default: the packaged Bangla digits)",
    )
    parser.add_argument("--layout", default="hms", choices=("hms", "smh"))
    parser.add_argument(
        "--scan-ms",
        type=int,
        default=100,
        metavar="N",
        help="virtual milliseconds per firmware button scan (default 100)",
    )
    parser.add_argument(
        "--no-freeze",
        action="store_true",
        help="keep the clock ticking while a field is being adjusted",
    )
    parser.add_argument(
        "--speed",
        type=float,
        default=default_speed,
        metavar="X",
        help=f"real-time multiplier; 0 = as fast as possible (default {default_speed:g})",
    )


def _config_from(args) -> SimConfig:
    return SimConfig(
        firmware=args.firmware,
        glyph_asset=args.glyphs,
        layout=args.layout,
        speed=args.speed,
        freeze_while_adjusting=not args.no_freeze,
        scan_ms=args.scan_ms,
    )


class _SnapshotWriter:
    def __init__(self, directory: str):
        self.dir = pathlib.Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.seq = 0

    def __call__(self, frame):
        path = self.dir / f"{self.seq:06d}.txt"
        path.write_text(snapshot(frame), encoding="utf-8")
        self.seq += 1


def cmd_run(args) -> int:
    config = _config_from(args)
    script = load_button_script(args.script) if args.script else ()
    on_frame = _SnapshotWriter(args.snapshot_dir) if args.snapshot_dir else None
    if config.speed == 0:
        final = run_headless(
            config, script, args.duration_ms, on_frame, args.every_frame
        )
    else:
        final = _run_paced(config, script, args.duration_ms, on_frame, args.every_frame)
    print(snapshot(final), end="")
    return 0


def _run_paced(config, script, duration_ms, on_frame, every_frame):
    if duration_ms < 0:
        raise ConfigError(f"duration must be >= 0, got {duration_ms}")
    for ev in script:
        if ev.at_ms > duration_ms:
            raise ScriptError(f"event at {ev.at_ms}ms is beyond the {duration_ms}ms run")
    with Simulation(config, list(script)) as sim:
        if on_frame is not None:
            on_frame(sim.frame())
        wall0 = time.monotonic()
        t = 0
        while t < duration_ms:
            t = min(duration_ms, t + config.scan_ms)
            due = wall0 + t / (1000.0 * config.speed)
            delay = due - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            sim.step_to(t, on_frame, every_frame)
        return sim.frame()


def cmd_serve(args) -> int:
    from .service import serve

    serve(_config_from(args), port=args.port, host=args.host)
    return 0


def cmd_render(args) -> int:
    try:
        start = TimeOfDay.parse(args.time)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    frame = run_headless(
        SimConfig(glyph_asset=args.glyphs), (), 0, start_time=start
    )
    print(snapshot(frame), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clocksim",
        description="Simulate a Bangla-digit LCD clock in virtual time.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scripted simulation to completion")
    _add_config_flags(run_p, default_speed=0.0)
    run_p.add_argument("--script", metavar="FILE", help="button event script")
    run_p.add_argument(
        "--duration-ms", type=int, required=True, metavar="N",
        help="virtual run length in milliseconds",
    )
    run_p.add_argument(
        "--snapshot-dir", metavar="DIR",
        help="write a numbered snapshot for every emitted frame",
    )
    run_p.add_argument(
        "--every-frame", action="store_true",
        help="emit frames at every step even when the display is unchanged",
    )
    run_p.set_defaults(func=cmd_run)

    serve_p = sub.add_parser("serve", help="serve the simulation over HTTP")
    _add_config_flags(serve_p, default_speed=1.0)
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.set_defaults(func=cmd_serve)

    render_p = sub.add_parser("render", help="print one clock face and exit")
    render_p.add_argument("--time", default="00:00:00", metavar="HH:MM:SS")
    render_p.add_argument("--glyphs", default=None, metavar="FILE")
    render_p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ScriptError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except FirmwareError as err:
        print(f"firmware error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
