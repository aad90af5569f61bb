// Single state store: everything rendered comes from here, and every frame
// field in here came from a received server message.

import { Mode, StateFrame } from "./protocol.js";

export type Connection = "disconnected" | "connecting" | "live";

export interface Command {
  surge: number;
  yaw: number;
}

export const TRAIL_MAX = 5000;

export class ConsoleStore {
  connection: Connection = "disconnected";
  latestFrame: StateFrame | null = null;
  command: Command = { surge: 0, yaw: 0 };
  mode: Mode = "open_loop";
  setpointDeg = 0;
  trail: Array<[number, number]> = [];
  lastError = "";

  setConnection(c: Connection): void {
    if (c === "live" && this.connection !== "live") {
      // fresh session: stale trail and commands are unsafe to keep
      this.trail = [];
      this.command = { surge: 0, yaw: 0 };
    }
    this.connection = c;
  }

  applyFrame(frame: StateFrame): void {
    this.latestFrame = frame;
    this.trail.push([frame.position[0], frame.position[1]]);
    if (this.trail.length > TRAIL_MAX) {
      this.trail.splice(0, this.trail.length - TRAIL_MAX);
    }
  }

  setCommand(cmd: Command): void {
    this.command = cmd;
  }

  setMode(mode: Mode, setpointDeg: number): void {
    this.mode = mode;
    this.setpointDeg = setpointDeg;
  }
}
