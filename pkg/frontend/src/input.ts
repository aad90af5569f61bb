// Pilot input: W/S drive surge +/-, A/D drive yaw +/- (A = turn left,
// positive heading rate, z-up). Keys release to zero; sliders override keys.

import { Command } from "./store.js";
import { clamp } from "./protocol.js";

export class PilotInput {
  private held = new Set<string>();
  private sliderCommand: Command | null = null;

  /** Returns true when the key is one of ours (caller preventDefaults). */
  keyDown(key: string): boolean {
    const k = key.toLowerCase();
    if (!"wsad".includes(k) || k.length !== 1) return false;
    this.held.add(k);
    return true;
  }

  keyUp(key: string): boolean {
    const k = key.toLowerCase();
    if (!"wsad".includes(k) || k.length !== 1) return false;
    this.held.delete(k);
    return true;
  }

  releaseAll(): void {
    this.held.clear();
  }

  setSliders(surge: number, yaw: number): void {
    this.sliderCommand = { surge: clamp(surge), yaw: clamp(yaw) };
  }

  clearSliders(): void {
    this.sliderCommand = null;
  }

  command(): Command {
    if (this.sliderCommand !== null) return { ...this.sliderCommand };
    const surge = (this.held.has("w") ? 1 : 0) - (this.held.has("s") ? 1 : 0);
    const yaw = (this.held.has("a") ? 1 : 0) - (this.held.has("d") ? 1 : 0);
    return { surge, yaw };
  }
}
