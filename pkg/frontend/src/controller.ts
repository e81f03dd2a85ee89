/** Panel construction and user-input wiring for the clock UI. */

import {
  Button,
  FramePayload,
  postButton,
  postSpeed,
} from "./api.js";
import { LcdView } from "./lcd-view.js";

const MODE_LABELS: Record<string, string> = {
  run: "running",
  set_hour: "set hour",
  set_min: "set minute",
  set_sec: "set second",
};

export interface PanelElements {
  container: HTMLElement;
  view: LcdView;
  time: HTMLElement;
  mode: HTMLElement;
  status: HTMLElement;
  buttons: Record<Button, HTMLButtonElement>;
  speed: HTMLInputElement;
  speedLabel: HTMLElement;
}

export function buildPanel(doc: Document, container: HTMLElement): PanelElements {
  container.classList.add("clock-panel");

  const view = new LcdView(doc);
  container.appendChild(view.root);

  const readout = doc.createElement("div");
  readout.className = "readout";
  const time = doc.createElement("span");
  time.className = "time";
  time.textContent = "--:--:--";
  const mode = doc.createElement("span");
  mode.className = "mode";
  mode.textContent = "connecting";
  readout.append(time, mode);
  container.appendChild(readout);

  const buttonRow = doc.createElement("div");
  buttonRow.className = "buttons";
  const buttons = {} as Record<Button, HTMLButtonElement>;
  const labels: Array<[Button, string]> = [
    ["set", "SET"],
    ["inc", "+"],
    ["dec", "−"],
  ];
  for (const [name, label] of labels) {
    const b = doc.createElement("button");
    b.type = "button";
    b.dataset.button = name;
    b.textContent = label;
    buttonRow.appendChild(b);
    buttons[name] = b;
  }
  container.appendChild(buttonRow);

  const speedRow = doc.createElement("div");
  speedRow.className = "speed-row";
  const speedLabel = doc.createElement("label");
  speedLabel.textContent = "speed 1x";
  const speed = doc.createElement("input");
  speed.type = "range";
  speed.min = "0";
  speed.max = "3";
  speed.step = "0.25";
  speed.value = "0";
  speedRow.append(speedLabel, speed);
  container.appendChild(speedRow);

  const status = doc.createElement("div");
  status.className = "status";
  status.textContent = "";
  container.appendChild(status);

  return { container, view, time, mode, status, buttons, speed, speedLabel };
}

/**
 * Owns the panel: sends button edges (strictly alternating down/up per
 * button), applies incoming frames, and reflects connection state.
 */
export class ClockController {
  private down = new Set<Button>();
  lastError: string | null = null;

  constructor(
    private base: string,
    readonly els: PanelElements,
  ) {
    for (const name of Object.keys(els.buttons) as Button[]) {
      const el = els.buttons[name];
      el.addEventListener("pointerdown", () => void this.press(name));
      el.addEventListener("pointerup", () => void this.release(name));
      el.addEventListener("pointerleave", () => void this.release(name));
    }
    els.speed.addEventListener("change", () => {
      void this.applySpeed(sliderToSpeed(els.speed.value));
    });
  }

  /** Send a press edge; ignored while the button is already down. */
  async press(button: Button): Promise<void> {
    if (this.down.has(button)) return;
    this.down.add(button);
    try {
      await postButton(this.base, button, "down");
    } catch (err) {
      this.down.delete(button);
      this.lastError = String(err);
    }
  }

  /** Send a release edge; ignored when the button is not down. */
  async release(button: Button): Promise<void> {
    if (!this.down.has(button)) return;
    this.down.delete(button);
    try {
      await postButton(this.base, button, "up");
    } catch (err) {
      this.lastError = String(err);
    }
  }

  async applySpeed(speed: number): Promise<void> {
    try {
      const cfg = await postSpeed(this.base, speed);
      this.showSpeed(cfg.speed);
    } catch (err) {
      this.lastError = String(err);
    }
  }

  showSpeed(speed: number): void {
    this.els.speedLabel.textContent = `speed ${formatSpeed(speed)}x`;
    this.els.speed.value = String(speedToSlider(speed));
  }

  showFrame(frame: FramePayload): void {
    this.els.time.textContent = frame.time;
    this.els.mode.textContent = MODE_LABELS[frame.mode] ?? frame.mode;
    this.els.mode.dataset.mode = frame.mode;
    this.els.view.update(frame);
  }

  setConnected(up: boolean): void {
    this.els.status.textContent = up ? "" : "connection lost - retrying";
    this.els.status.classList.toggle("down", !up);
    for (const el of Object.values(this.els.buttons)) {
      el.disabled = !up;
    }
  }
}

/** Slider is log-scaled: 10^v for v in 0..3 -> 1x..1000x. */
export function sliderToSpeed(value: string): number {
  return Math.round(10 ** Number(value) * 100) / 100;
}

export function speedToSlider(speed: number): number {
  if (speed <= 0) return 0;
  return Math.min(3, Math.max(0, Math.log10(speed)));
}

function formatSpeed(speed: number): string {
  return speed >= 100 ? speed.toFixed(0) : String(speed);
}
