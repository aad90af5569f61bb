// Rendering: numeric readouts (with units), duty bar chart, top-down trail.

import { StateFrame } from "./protocol.js";
import { ConsoleStore } from "./store.js";

export function headingDeg(frame: StateFrame): number {
  return (frame.heading * 180) / Math.PI;
}

export function depthM(frame: StateFrame): number {
  return -frame.position[2];
}

export function speedMS(frame: StateFrame): number {
  const [u, v, w] = frame.lin_vel;
  return Math.sqrt(u * u + v * v + w * w);
}

export interface Readouts {
  t: string;
  heading: string;
  depth: string;
  speed: string;
}

export function readouts(frame: StateFrame): Readouts {
  return {
    t: `${frame.t.toFixed(2)} s`,
    heading: `${headingDeg(frame).toFixed(1)} deg`,
    depth: `${depthM(frame).toFixed(3)} m`,
    speed: `${speedMS(frame).toFixed(3)} m/s`,
  };
}

/**
 * Map world (x, y) trail points into canvas pixels, centered and uniformly
 * scaled to fit with a margin. Returns [] for an empty trail.
 */
export function trailToPixels(
  trail: Array<[number, number]>,
  width: number,
  height: number,
  margin = 20,
): Array<[number, number]> {
  if (trail.length === 0) return [];
  let minX = Infinity,
    maxX = -Infinity,
    minY = Infinity,
    maxY = -Infinity;
  for (const [x, y] of trail) {
    minX = Math.min(minX, x);
    maxX = Math.max(maxX, x);
    minY = Math.min(minY, y);
    maxY = Math.max(maxY, y);
  }
  const span = Math.max(maxX - minX, maxY - minY, 0.5);
  const scale = (Math.min(width, height) - 2 * margin) / span;
  const cx = (minX + maxX) / 2;
  const cy = (minY + maxY) / 2;
  // world x (forward) points up the screen, world y points left
  return trail.map(([x, y]) => [
    width / 2 - (y - cy) * scale,
    height / 2 - (x - cx) * scale,
  ]);
}

export class ConsoleRenderer {
  private readonly statusEl: HTMLElement;
  private readonly readoutEls: Record<keyof Readouts, HTMLElement>;
  private readonly dutyEls: HTMLElement[];
  private readonly dutyLabelEls: HTMLElement[];
  private readonly commandEl: HTMLElement;
  private readonly canvas: HTMLCanvasElement;
  frameCount = 0;

  constructor(doc: Document) {
    this.statusEl = doc.getElementById("status")!;
    this.readoutEls = {
      t: doc.getElementById("readout-t")!,
      heading: doc.getElementById("readout-heading")!,
      depth: doc.getElementById("readout-depth")!,
      speed: doc.getElementById("readout-speed")!,
    };
    this.dutyEls = [];
    this.dutyLabelEls = [];
    for (let j = 0; j < 6; j++) {
      this.dutyEls.push(doc.getElementById(`duty-${j}`)!);
      this.dutyLabelEls.push(doc.getElementById(`duty-label-${j}`)!);
    }
    this.commandEl = doc.getElementById("command")!;
    this.canvas = doc.getElementById("trail") as HTMLCanvasElement;
  }

  render(store: ConsoleStore): void {
    this.statusEl.textContent = store.connection.toUpperCase();
    this.statusEl.className = `status ${store.connection}`;
    this.commandEl.textContent =
      `surge ${store.command.surge.toFixed(2)}  yaw ${store.command.yaw.toFixed(2)}` +
      (store.mode === "heading_hold"
        ? `  |  heading hold ${store.setpointDeg.toFixed(0)} deg`
        : "");
    const frame = store.latestFrame;
    if (frame === null) return;
    this.frameCount += 1;
    const r = readouts(frame);
    this.readoutEls.t.textContent = r.t;
    this.readoutEls.heading.textContent = r.heading;
    this.readoutEls.depth.textContent = r.depth;
    this.readoutEls.speed.textContent = r.speed;
    for (let j = 0; j < 6; j++) {
      const duty = frame.pair_duties[j];
      const el = this.dutyEls[j];
      el.style.height = `${Math.abs(duty) * 50}%`;
      el.style.bottom = duty >= 0 ? "50%" : `${50 - Math.abs(duty) * 50}%`;
      el.className = duty >= 0 ? "duty-bar positive" : "duty-bar negative";
      this.dutyLabelEls[j].textContent = duty.toFixed(2);
    }
    this.drawTrail(store.trail);
  }

  private drawTrail(trail: Array<[number, number]>): void {
    const ctx = this.canvas.getContext("2d");
    if (ctx === null) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.strokeStyle = "#2a3b4d";
    ctx.strokeRect(0, 0, width, height);
    const pts = trailToPixels(trail, width, height);
    if (pts.length === 0) return;
    ctx.beginPath();
    ctx.moveTo(pts[0][0], pts[0][1]);
    for (const [x, y] of pts) ctx.lineTo(x, y);
    ctx.strokeStyle = "#5ec8f0";
    ctx.stroke();
    const [hx, hy] = pts[pts.length - 1];
    ctx.fillStyle = "#ffd166";
    ctx.beginPath();
    ctx.arc(hx, hy, 4, 0, 2 * Math.PI);
    ctx.fill();
  }
}
