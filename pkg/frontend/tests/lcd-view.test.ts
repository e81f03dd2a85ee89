// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import { PIXEL_COLS, PIXEL_ROWS } from "../src/api.js";
import { LcdView } from "../src/lcd-view.js";
import { makeFrame } from "./helpers.js";

function dotAt(view: LcdView, row: number, col: number): Element {
  return view.root.children[row * PIXEL_COLS + col];
}

describe("LcdView", () => {
  it("builds one dot per pixel", () => {
    const view = new LcdView(document);
    expect(view.dotCount()).toBe(PIXEL_ROWS * PIXEL_COLS);
    expect(view.root.children).toHaveLength(1280);
    expect(view.root.className).toBe("lcd");
    expect(view.litCount()).toBe(0);
  });

  it("marks cell and row gutters", () => {
    const view = new LcdView(document);
    expect(dotAt(view, 0, 4).classList.contains("cell-end")).toBe(true);
    expect(dotAt(view, 0, 5).classList.contains("cell-end")).toBe(false);
    expect(dotAt(view, 0, 79).classList.contains("cell-end")).toBe(false);
    expect(dotAt(view, 7, 0).classList.contains("row-end")).toBe(true);
    expect(dotAt(view, 8, 0).classList.contains("row-end")).toBe(false);
    expect(dotAt(view, 15, 0).classList.contains("row-end")).toBe(false);
  });

  it("lights exactly the dots named by the frame", () => {
    const view = new LcdView(document);
    view.update(makeFrame({}, [[0, 0], [7, 42], [15, 79]]));

    expect(view.litCount()).toBe(3);
    expect(dotAt(view, 0, 0).classList.contains("on")).toBe(true);
    expect(dotAt(view, 7, 42).classList.contains("on")).toBe(true);
    expect(dotAt(view, 15, 79).classList.contains("on")).toBe(true);
    expect(dotAt(view, 0, 1).classList.contains("on")).toBe(false);
  });

  it("applies frame-to-frame differences", () => {
    const view = new LcdView(document);
    view.update(makeFrame({}, [[0, 0], [7, 42]]));
    view.update(makeFrame({}, [[7, 42], [3, 3]]));

    expect(view.litCount()).toBe(2);
    expect(dotAt(view, 0, 0).classList.contains("on")).toBe(false);
    expect(dotAt(view, 7, 42).classList.contains("on")).toBe(true);
    expect(dotAt(view, 3, 3).classList.contains("on")).toBe(true);
  });

  it("repeating a frame leaves the grid unchanged", () => {
    const view = new LcdView(document);
    const frame = makeFrame({}, [[1, 1], [2, 2]]);
    view.update(frame);
    const before = view.root.innerHTML;
    view.update(frame);
    expect(view.root.innerHTML).toBe(before);
    expect(view.litCount()).toBe(2);
  });
});
