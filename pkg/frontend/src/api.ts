/** Typed client for the simulation service. */

export interface FramePayload {
  virtual_ms: number;
  time: string;
  mode: string;
  cells: number[][];
  /** base64 bitmask, 16 pixel rows x 80 columns, MSB-first per byte */
  pixels: string;
}

export interface ConfigPayload {
  firmware: string;
  glyph_asset: string | null;
  layout: string;
  speed: number;
  freeze_while_adjusting: boolean;
  scan_ms: number;
}

export type Button = "set" | "inc" | "dec";
export type Action = "down" | "up";

export const PIXEL_ROWS = 16;
export const PIXEL_COLS = 80;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

async function expectJson<T>(res: Response, what: string): Promise<T> {
  if (!res.ok) {
    throw new ApiError(res.status, `${what}: HTTP ${res.status}`);
  }
  return (await res.json()) as T;
}

export function getState(base = ""): Promise<FramePayload> {
  return fetch(`${base}/api/state`).then((r) => expectJson(r, "state"));
}

export function getConfig(base = ""): Promise<ConfigPayload> {
  return fetch(`${base}/api/config`).then((r) => expectJson(r, "config"));
}

export async function postButton(
  base: string,
  button: Button,
  action: Action,
): Promise<void> {
  const res = await fetch(`${base}/api/button`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ button, action }),
  });
  if (res.status !== 204) {
    throw new ApiError(res.status, `button ${button} ${action}: HTTP ${res.status}`);
  }
}

export function postSpeed(base: string, speed: number): Promise<ConfigPayload> {
  return fetch(`${base}/api/config`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ speed }),
  }).then((r) => expectJson(r, "config update"));
}

/** Unpack the base64 bitmask into [row][col] booleans. */
export function decodePixels(b64: string): boolean[][] {
  const bin = atob(b64);
  const grid: boolean[][] = [];
  for (let row = 0; row < PIXEL_ROWS; row++) {
    const line: boolean[] = new Array(PIXEL_COLS);
    for (let col = 0; col < PIXEL_COLS; col++) {
      const j = row * PIXEL_COLS + col;
      line[col] = ((bin.charCodeAt(j >> 3) >> (7 - (j & 7))) & 1) === 1;
    }
    grid.push(line);
  }
  return grid;
}

export interface Subscription {
  close(): void;
}

export interface SubscribeOptions {
  /** polling cadence in ms when WebSocket is unavailable (default 500) */
  pollMs?: number;
  /** skip WebSocket even when the runtime provides it */
  forcePolling?: boolean;
  onStatus?: (connected: boolean) => void;
}

const MAX_BACKOFF_MS = 10_000;

/**
 * Stream frames: WebSocket when the runtime has one, otherwise polling.
 * Both paths reconnect; polling backs off exponentially while the
 * service is unreachable.
 */
export function subscribe(
  base: string,
  onFrame: (frame: FramePayload) => void,
  opts: SubscribeOptions = {},
): Subscription {
  const pollMs = opts.pollMs ?? 500;
  let closed = false;
  let timer: ReturnType<typeof setTimeout> | undefined;
  let ws: WebSocket | undefined;
  let lastStatus: boolean | undefined;

  const setStatus = (up: boolean) => {
    if (lastStatus !== up) {
      lastStatus = up;
      opts.onStatus?.(up);
    }
  };

  let misses = 0;
  const schedule = (fn: () => void, delay: number) => {
    if (!closed) {
      timer = setTimeout(fn, delay);
    }
  };
  const poll = () => {
    getState(base).then(
      (frame) => {
        if (closed) return;
        misses = 0;
        setStatus(true);
        onFrame(frame);
        schedule(poll, pollMs);
      },
      () => {
        if (closed) return;
        misses += 1;
        setStatus(false);
        schedule(poll, Math.min(pollMs * 2 ** misses, MAX_BACKOFF_MS));
      },
    );
  };

  const WsCtor = (globalThis as { WebSocket?: typeof WebSocket }).WebSocket;
  if (!opts.forcePolling && typeof WsCtor === "function") {
    const openSocket = () => {
      ws = new WsCtor(wsUrl(base));
      ws.onopen = () => setStatus(true);
      ws.onmessage = (ev) => onFrame(JSON.parse(ev.data as string) as FramePayload);
      ws.onclose = () => {
        setStatus(false);
        schedule(openSocket, 1000);
      };
      ws.onerror = () => ws?.close();
    };
    openSocket();
  } else {
    poll();
  }

  return {
    close() {
      closed = true;
      if (timer !== undefined) clearTimeout(timer);
      ws?.close();
    },
  };
}

function wsUrl(base: string): string {
  const origin =
    typeof location !== "undefined" ? location.href : "http://127.0.0.1/";
  const url = new URL(`${base}/api/events`, origin);
  url.protocol = url.protocol === "https:" ? "wss:" : "ws:";
  return url.toString();
}
