// @vitest-environment jsdom
//
// End-to-end: spawn the real service (`clocksim serve`), mount the UI
// against it, and drive the mode cycle through the DOM. Frames arrive
// over the polling path since this Node build has no global WebSocket.
import { ChildProcess, spawn } from "node:child_process";
import { existsSync } from "node:fs";
import net from "node:net";
import path from "node:path";
import { afterAll, afterEach, beforeAll, describe, expect, it, vi } from "vitest";

import { App, start } from "../src/main.js";

function repoRoot(): string {
  let dir = process.cwd();
  while (!existsSync(path.join(dir, "pyproject.toml"))) {
    const parent = path.dirname(dir);
    if (parent === dir) throw new Error("repository root not found");
    dir = parent;
  }
  return dir;
}

const REPO_ROOT = repoRoot();
const SPEED = 50; // virtual seconds tick every 20ms of wall time

let child: ChildProcess;
let childLog = "";
let base = "";
let app: App | undefined;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = net.createServer();
    srv.once("error", reject);
    srv.listen(0, "127.0.0.1", () => {
      const { port } = srv.address() as net.AddressInfo;
      srv.close(() => resolve(port));
    });
  });
}

async function waitForServer(): Promise<void> {
  const deadline = Date.now() + 20_000;
  while (Date.now() < deadline) {
    if (child.exitCode !== null) {
      throw new Error(`server exited early (${child.exitCode}): ${childLog}`);
    }
    try {
      const res = await fetch(`${base}/api/state`);
      if (res.ok) return;
    } catch {
      // not listening yet
    }
    await sleep(100);
  }
  throw new Error(`server never came up: ${childLog}`);
}

/** One full press through the DOM, serialized so down lands before up. */
async function tap(el: HTMLElement): Promise<void> {
  el.dispatchEvent(new Event("pointerdown"));
  await sleep(40);
  el.dispatchEvent(new Event("pointerup"));
  await sleep(40);
}

beforeAll(async () => {
  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  child = spawn(
    "clocksim",
    ["serve", "--port", String(port), "--host", "127.0.0.1", "--speed", String(SPEED)],
    { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  child.stdout?.on("data", (chunk) => (childLog += chunk));
  child.stderr?.on("data", (chunk) => (childLog += chunk));
  await waitForServer();
});

afterEach(() => {
  app?.stop();
  app = undefined;
  document.body.innerHTML = "";
});

afterAll(async () => {
  if (!child) return;
  const exited = new Promise<void>((resolve) => child.once("exit", () => resolve()));
  child.kill("SIGTERM");
  await Promise.race([exited, sleep(5_000).then(() => child.kill("SIGKILL"))]);
});

async function mountApp(): Promise<App> {
  const container = document.createElement("div");
  document.body.appendChild(container);
  return start(document, container, base, { forcePolling: true, pollMs: 50 });
}

describe("served UI", () => {
  it("serves the built page at the root", async () => {
    const res = await fetch(`${base}/`);
    expect(res.status).toBe(200);
    expect(res.headers.get("content-type")).toContain("text/html");
    expect(await res.text()).toContain('id="app"');
  });

  it("shows a ticking clock", async () => {
    app = await mountApp();
    const els = app.controller.els;
    expect(els.time.textContent).toMatch(/^\d\d:\d\d:\d\d$/);
    const before = els.time.textContent;

    await vi.waitFor(
      () => expect(els.time.textContent).not.toBe(before),
      { timeout: 10_000, interval: 50 },
    );
    expect(els.mode.textContent).toBe("running");
  });

  it("SET, +, SET x3 advances the hour by one", async () => {
    app = await mountApp();
    const els = app.controller.els;

    await tap(els.buttons.set);
    await vi.waitFor(
      () => expect(els.mode.textContent).toBe("set hour"),
      { timeout: 10_000, interval: 50 },
    );
    // frozen while adjusting, so the hour read here is stable
    const hour = Number(els.time.textContent!.slice(0, 2));
    const wantHour = String((hour + 1) % 24).padStart(2, "0");

    await tap(els.buttons.inc);
    await vi.waitFor(
      () => expect(els.time.textContent!.slice(0, 2)).toBe(wantHour),
      { timeout: 10_000, interval: 50 },
    );

    for (let i = 0; i < 3; i++) {
      await tap(els.buttons.set);
    }
    await vi.waitFor(
      () => expect(els.mode.textContent).toBe("running"),
      { timeout: 10_000, interval: 50 },
    );
    expect(els.time.textContent!.slice(0, 2)).toBe(wantHour);

    const res = await fetch(`${base}/api/state`);
    const state = (await res.json()) as { time: string; mode: string };
    expect(state.mode).toBe("run");
    expect(state.time.slice(0, 2)).toBe(wantHour);
  });
});
