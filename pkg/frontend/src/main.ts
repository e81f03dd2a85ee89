/** Entry point: builds the panel and keeps it synced with the server. */

import { getConfig, getState, subscribe, Subscription } from "./api.js";
import { buildPanel, ClockController } from "./controller.js";

export interface App {
  controller: ClockController;
  subscription: Subscription;
  stop(): void;
}

/**
 * Mount the clock UI under `container`, served from `base` (same-origin
 * when empty). Returns handles so tests can drive and tear it down.
 */
export async function start(
  doc: Document,
  container: HTMLElement,
  base = "",
  opts: { pollMs?: number; forcePolling?: boolean } = {},
): Promise<App> {
  const els = buildPanel(doc, container);
  const controller = new ClockController(base, els);

  const [frame, cfg] = await Promise.all([getState(base), getConfig(base)]);
  controller.showFrame(frame);
  controller.showSpeed(cfg.speed);
  controller.setConnected(true);

  const subscription = subscribe(base, (f) => controller.showFrame(f), {
    pollMs: opts.pollMs,
    forcePolling: opts.forcePolling,
    onStatus: (up) => controller.setConnected(up),
  });

  return {
    controller,
    subscription,
    stop: () => subscription.close(),
  };
}

// In the browser the bundle auto-mounts onto <div id="app">; under test
// there is no such element and the caller invokes start() directly.
const appRoot =
  typeof document !== "undefined" ? document.getElementById("app") : null;
if (appRoot) {
  void start(document, appRoot);
}
