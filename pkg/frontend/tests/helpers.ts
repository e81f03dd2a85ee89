import { FramePayload, PIXEL_COLS, PIXEL_ROWS } from "../src/api.js";

/** Base64-encode a pixel mask with the given (row, col) dots lit. */
export function pixelsB64(on: Array<[number, number]>): string {
  const bytes = new Uint8Array((PIXEL_ROWS * PIXEL_COLS) / 8);
  for (const [row, col] of on) {
    const j = row * PIXEL_COLS + col;
    bytes[j >> 3] |= 1 << (7 - (j & 7));
  }
  return Buffer.from(bytes).toString("base64");
}

export function makeFrame(
  overrides: Partial<FramePayload> = {},
  dots: Array<[number, number]> = [],
): FramePayload {
  return {
    virtual_ms: 0,
    time: "00:00:00",
    mode: "run",
    cells: [new Array(16).fill(32), new Array(16).fill(32)],
    pixels: pixelsB64(dots),
    ...overrides,
  };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

/** Drain the microtask queue so settled fetch chains run to completion. */
export async function flush(): Promise<void> {
  for (let i = 0; i < 10; i++) {
    await Promise.resolve();
  }
}
