/** Dot-matrix rendering of one display frame as a grid of DOM nodes. */

import { decodePixels, FramePayload, PIXEL_COLS, PIXEL_ROWS } from "./api.js";

export class LcdView {
  readonly root: HTMLElement;
  private dots: HTMLElement[] = [];
  private lit: boolean[] = [];

  constructor(doc: Document) {
    this.root = doc.createElement("div");
    this.root.className = "lcd";
    this.root.setAttribute("role", "img");
    this.root.setAttribute("aria-label", "clock display");
    for (let row = 0; row < PIXEL_ROWS; row++) {
      for (let col = 0; col < PIXEL_COLS; col++) {
        const dot = doc.createElement("span");
        dot.className = "dot";
        // widen the gutters between 5x8 character cells
        if (col % 5 === 4 && col !== PIXEL_COLS - 1) dot.classList.add("cell-end");
        if (row % 8 === 7 && row !== PIXEL_ROWS - 1) dot.classList.add("row-end");
        this.root.appendChild(dot);
        this.dots.push(dot);
        this.lit.push(false);
      }
    }
  }

  /** Apply a frame, touching only the dots whose state changed. */
  update(frame: FramePayload): void {
    const grid = decodePixels(frame.pixels);
    let i = 0;
    for (let row = 0; row < PIXEL_ROWS; row++) {
      for (let col = 0; col < PIXEL_COLS; col++, i++) {
        const on = grid[row][col];
        if (this.lit[i] !== on) {
          this.lit[i] = on;
          this.dots[i].classList.toggle("on", on);
        }
      }
    }
  }

  dotCount(): number {
    return this.dots.length;
  }

  litCount(): number {
    return this.lit.reduce((n, on) => n + (on ? 1 : 0), 0);
  }
}
