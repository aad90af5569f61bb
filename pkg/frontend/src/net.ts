// WebSocket link to the simulation gateway: reconnect with backoff, liveness
// timeout, and a known-safe zero command on every (re)connect.

import { commandMessage, parseServerMessage, StateFrame } from "./protocol.js";
import { Connection } from "./store.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface LinkHandlers {
  onState(frame: StateFrame): void;
  onConnection(state: Connection): void;
  onError(msg: string): void;
}

const LIVENESS_TIMEOUT_MS = 2000;
const BACKOFF_START_MS = 500;
const BACKOFF_MAX_MS = 5000;

export class TeleopLink {
  private socket: SocketLike | null = null;
  private lastFrameAt = 0;
  private backoffMs = BACKOFF_START_MS;
  private watchdog: ReturnType<typeof setInterval> | null = null;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private stopped = false;
  state: Connection = "disconnected";

  constructor(
    private readonly url: string,
    private readonly handlers: LinkHandlers,
    private readonly factory: SocketFactory = (u) => new WebSocket(u) as unknown as SocketLike,
  ) {}

  connect(): void {
    this.stopped = false;
    this.open();
    if (this.watchdog === null) {
      this.watchdog = setInterval(() => this.checkLiveness(), 250);
    }
  }

  private setState(state: Connection): void {
    if (state !== this.state) {
      this.state = state;
      this.handlers.onConnection(state);
    }
  }

  private open(): void {
    this.setState("connecting");
    let socket: SocketLike;
    try {
      socket = this.factory(this.url);
    } catch {
      this.scheduleReconnect();
      return;
    }
    this.socket = socket;
    socket.onopen = () => {
      this.backoffMs = BACKOFF_START_MS;
      this.lastFrameAt = Date.now();
      this.setState("live");
      socket.send(commandMessage(0, 0)); // known-safe state first
    };
    socket.onmessage = (ev) => {
      const msg = parseServerMessage(ev.data);
      if (msg === null) return;
      if (msg.type === "state") {
        this.lastFrameAt = Date.now();
        this.handlers.onState(msg);
      } else {
        this.handlers.onError(msg.msg);
      }
    };
    socket.onclose = () => this.dropped();
    socket.onerror = () => this.dropped();
  }

  private dropped(): void {
    if (this.socket === null) return;
    this.socket.onclose = null;
    this.socket.onerror = null;
    this.socket = null;
    this.setState("disconnected");
    this.scheduleReconnect();
  }

  private checkLiveness(): void {
    if (this.state === "live" && Date.now() - this.lastFrameAt > LIVENESS_TIMEOUT_MS) {
      const s = this.socket;
      this.socket = null;
      if (s) {
        s.onclose = null;
        s.onerror = null;
        try {
          s.close();
        } catch {
          // already gone
        }
      }
      this.setState("disconnected");
      this.scheduleReconnect();
    }
  }

  private scheduleReconnect(): void {
    if (this.stopped || this.reconnectTimer !== null) return;
    this.reconnectTimer = setTimeout(() => {
      this.reconnectTimer = null;
      if (!this.stopped) this.open();
    }, this.backoffMs);
    this.backoffMs = Math.min(this.backoffMs * 2, BACKOFF_MAX_MS);
  }

  send(text: string): boolean {
    if (this.state !== "live" || this.socket === null) return false;
    this.socket.send(text);
    return true;
  }

  stop(): void {
    this.stopped = true;
    if (this.watchdog !== null) clearInterval(this.watchdog);
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    this.watchdog = null;
    this.reconnectTimer = null;
    if (this.socket !== null) this.socket.close();
    this.socket = null;
    this.setState("disconnected");
  }
}
