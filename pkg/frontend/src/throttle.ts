// Command send scheduling: at most one send per minInterval (20 Hz default),
// sent on change, plus a keep-alive resend every 500 ms.

import { Command } from "./store.js";

export class CommandScheduler {
  private lastSent: Command | null = null;
  private lastSentAt = -Infinity;

  constructor(
    private readonly send: (cmd: Command) => void,
    private readonly minIntervalMs = 50,
    private readonly keepAliveMs = 500,
  ) {}

  /** Call on every input event and on a periodic tick with the current command. */
  update(cmd: Command, nowMs: number): void {
    const changed =
      this.lastSent === null ||
      cmd.surge !== this.lastSent.surge ||
      cmd.yaw !== this.lastSent.yaw;
    const since = nowMs - this.lastSentAt;
    if ((changed && since >= this.minIntervalMs) || since >= this.keepAliveMs) {
      this.send({ ...cmd });
      this.lastSent = { ...cmd };
      this.lastSentAt = nowMs;
    }
  }

  /** Forget send history (new connection: resend immediately). */
  reset(): void {
    this.lastSent = null;
    this.lastSentAt = -Infinity;
  }
}
