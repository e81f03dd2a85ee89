"""HTTP and WebSocket access to one live simulation.

The whole service runs on a single asyncio loop: a pacing task advances
virtual time against the wall clock, and every handler touches the
simulation from that same loop, so no locking is needed.
"""

from __future__ import annotations

import asyncio
import base64
import contextlib
import errno
import os
import pathlib
import socket
import time

import uvicorn
from fastapi import FastAPI, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse, JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from .clock import ProtocolViolation
from .harness import ConfigError, Frame, ScriptError, SimConfig, Simulation, pack_pixels

_PACE_INTERVAL = 0.02  # seconds of wall time between virtual-time catch-ups

_FALLBACK_PAGE = """<!doctype html>
<html>
<head><meta charset="utf-8"><title>clocksim</title></head>
<body>
<h1>clocksim service</h1>
<p>The browser UI is not built. The API is live:</p>
<ul>
<li><a href="/api/state">GET /api/state</a></li>
<li><a href="/api/config">GET /api/config</a></li>
<li>POST /api/button with {"button": "set|inc|dec", "action": "down|up"}</li>
<li>WebSocket /api/events streams display frames</li>
</ul>
</body>
</html>
"""


class PortInUse(ConfigError):
    pass


def frame_payload(frame: Frame) -> dict:
    return {
        "virtual_ms": frame.virtual_ms,
        "time": frame.time.text(),
        "mode": frame.mode.value,
        "cells": [list(row) for row in frame.cells],
        "pixels": base64.b64encode(pack_pixels(frame.pixels)).decode("ascii"),
    }


def static_dir() -> pathlib.Path | None:
    """Browser UI assets: explicit override, else well-known build dirs."""
    override = os.environ.get("CLOCKSIM_STATIC")
    candidates = [pathlib.Path(override)] if override else [
        pathlib.Path("frontend/dist"),
        pathlib.Path(__file__).resolve().parents[2] / "frontend" / "dist",
    ]
    for cand in candidates:
        if (cand / "index.html").is_file():
            return cand
    return None


class _ServiceState:
    def __init__(self, sim: Simulation, config: SimConfig):
        self.sim = sim
        self.config = config
        self.speed = config.speed
        self.subscribers: set[asyncio.Queue] = set()
        self.latest = sim.frame()

    def broadcast(self, frame: Frame):
        self.latest = frame
        payload = frame_payload(frame)
        for q in self.subscribers:
            q.put_nowait(payload)

    def config_payload(self) -> dict:
        return {
            "firmware": self.config.firmware,
            "glyph_asset": self.config.glyph_asset,
            "layout": self.config.layout,
            "speed": self.speed,
            "freeze_while_adjusting": self.config.freeze_while_adjusting,
            "scan_ms": self.config.scan_ms,
        }


async def _pace(state: _ServiceState):
    wall = time.monotonic()
    virtual = float(state.sim.virtual_ms)
    while True:
        await asyncio.sleep(_PACE_INTERVAL)
        now = time.monotonic()
        virtual += (now - wall) * 1000.0 * state.speed
        wall = now
        target = int(virtual)
        if target > state.sim.virtual_ms:
            frames: list[Frame] = []
            state.sim.step_to(target, frames.append)
            for frame in frames:
                state.broadcast(frame)


def create_app(config: SimConfig, sim: Simulation | None = None) -> FastAPI:
    config.validate()
    if sim is None:
        sim = Simulation(config)
    state = _ServiceState(sim, config)

    @contextlib.asynccontextmanager
    async def lifespan(app):
        task = asyncio.create_task(_pace(state))
        try:
            yield
        finally:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task
            state.sim.close()

    app = FastAPI(title="clocksim", lifespan=lifespan)

    @app.get("/api/state")
    async def get_state():
        return JSONResponse(frame_payload(state.sim.frame()))

    @app.post("/api/button")
    async def post_button(request: Request):
        try:
            body = await request.json()
        except Exception:
            body = None
        if (
            not isinstance(body, dict)
            or body.get("button") not in ("set", "inc", "dec")
            or body.get("action") not in ("down", "up")
        ):
            return JSONResponse({"error": "bad_button"}, status_code=400)
        try:
            state.sim.press(body["button"], body["action"])
        except (ProtocolViolation, ScriptError):
            return JSONResponse({"error": "bad_press_order"}, status_code=409)
        frame = state.sim.frame()
        if (frame.time, frame.mode, frame.pixels) != (
            state.latest.time,
            state.latest.mode,
            state.latest.pixels,
        ):
            state.broadcast(frame)
        return Response(status_code=204)

    @app.get("/api/config")
    async def get_config():
        return JSONResponse(state.config_payload())

    @app.post("/api/config")
    async def post_config(request: Request):
        try:
            body = await request.json()
        except Exception:
            body = None
        speed = body.get("speed") if isinstance(body, dict) else None
        if not isinstance(speed, (int, float)) or isinstance(speed, bool) or speed < 0:
            return JSONResponse({"error": "bad_config"}, status_code=400)
        state.speed = float(speed)
        return JSONResponse(state.config_payload())

    @app.websocket("/api/events")
    async def events(ws: WebSocket):
        await ws.accept()
        queue: asyncio.Queue = asyncio.Queue()
        state.subscribers.add(queue)
        try:
            await ws.send_json(frame_payload(state.sim.frame()))
            while True:
                await ws.send_json(await queue.get())
        except WebSocketDisconnect:
            pass
        finally:
            state.subscribers.discard(queue)

    assets = static_dir()
    if assets is not None:
        app.mount("/", StaticFiles(directory=assets, html=True), name="ui")
    else:

        @app.get("/")
        async def index():
            return HTMLResponse(_FALLBACK_PAGE)

    return app


def serve(config: SimConfig, port: int, host: str = "127.0.0.1"):
    """Run the service until interrupted; raises PortInUse when the
    port cannot be bound."""
    config.validate()
    if config.speed <= 0:
        raise ConfigError("serve needs a speed greater than 0")
    app = create_app(config)
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            sock.bind((host, port))
        except OSError as err:
            if err.errno == errno.EADDRINUSE:
                raise PortInUse(f"port {port} on {host} is already in use") from err
            raise ConfigError(f"cannot bind {host}:{port}: {err}") from err
        sock.listen(128)
        server = uvicorn.Server(uvicorn.Config(app, log_level="warning"))
        server.run(sockets=[sock])
    finally:
        sock.close()
