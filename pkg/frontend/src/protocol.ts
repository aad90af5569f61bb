// Wire protocol bodies shared with the simulation server (JSON text messages).

export type Mode = "open_loop" | "heading_hold";

export interface StateFrame {
  type: "state";
  t: number;
  position: [number, number, number];
  attitude: [number, number, number, number];
  lin_vel: [number, number, number];
  ang_vel: [number, number, number];
  pair_duties: number[];
  motor_speeds: number[];
  heading: number;
}

export interface ErrMessage {
  type: "err";
  msg: string;
}

export type ServerMessage = StateFrame | ErrMessage;

export function clamp(x: number): number {
  if (Number.isNaN(x)) return 0;
  return Math.min(1, Math.max(-1, x));
}

export function commandMessage(surge: number, yaw: number): string {
  return JSON.stringify({ type: "cmd", surge: clamp(surge), yaw: clamp(yaw) });
}

export function modeMessage(mode: Mode, setpointDeg: number): string {
  return JSON.stringify({ type: "mode", value: mode, setpoint_deg: setpointDeg });
}

function isVec(x: unknown, n: number): x is number[] {
  return Array.isArray(x) && x.length === n && x.every((v) => typeof v === "number");
}

/** Parse a server message; returns null for anything malformed. */
export function parseServerMessage(raw: string): ServerMessage | null {
  let obj: unknown;
  try {
    obj = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const msg = obj as Record<string, unknown>;
  if (msg.type === "err" && typeof msg.msg === "string") {
    return { type: "err", msg: msg.msg };
  }
  if (
    msg.type === "state" &&
    typeof msg.t === "number" &&
    isVec(msg.position, 3) &&
    isVec(msg.attitude, 4) &&
    isVec(msg.lin_vel, 3) &&
    isVec(msg.ang_vel, 3) &&
    isVec(msg.pair_duties, 6) &&
    isVec(msg.motor_speeds, 12) &&
    typeof msg.heading === "number"
  ) {
    return msg as unknown as StateFrame;
  }
  return null;
}
