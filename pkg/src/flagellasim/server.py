"""Live telemetry/command server for piloting the simulated robot.

Wire protocol (newline-delimited JSON over a plain TCP socket, and the same
bodies over the browser WebSocket gateway at /ws):

    client -> server: {"type":"cmd","surge":<f>,"yaw":<f>}
                      {"type":"mode","value":"open_loop"|"heading_hold","setpoint_deg":<f>}
    server -> client: {"type":"state", ...TelemetryFrame fields...}
                      {"type":"err","msg":<s>}

One stepping task owns all simulation state and paces sim time to wall time.
Commands land in a single-slot latest-wins mailbox read once per telemetry
chunk; telemetry is fanned out through bounded per-client queues that drop
frames rather than stall physics.  Every effective command change is recorded
to a sidecar session log so the session can be replayed in batch.
"""

import asyncio
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import MODE_HEADING_HOLD, MODE_OPEN_LOOP, ScenarioConfig
from .kernels import FRAME_WIDTH
from .runtime import Engine, TimelineEntry, run_timeline


class ServerStartupError(RuntimeError):
    pass


def frame_to_message(row: np.ndarray) -> str:
    return json.dumps(
        {
            "type": "state",
            "t": float(row[0]),
            "position": [float(x) for x in row[1:4]],
            "attitude": [float(x) for x in row[4:8]],
            "lin_vel": [float(x) for x in row[8:11]],
            "ang_vel": [float(x) for x in row[11:14]],
            "pair_duties": [float(x) for x in row[14:20]],
            "motor_speeds": [float(x) for x in row[20:32]],
            "heading": float(row[32]),
        }
    )


def _clamp(x: float) -> float:
    return min(1.0, max(-1.0, float(x)))


@dataclass(frozen=True)
class Command:
    surge: float = 0.0
    yaw: float = 0.0
    mode: str = MODE_OPEN_LOOP
    setpoint_deg: float = 0.0


class _Client:
    def __init__(self, name: str):
        self.name = name
        self.queue: asyncio.Queue[str] = asyncio.Queue(maxsize=16)

    def push(self, message: str) -> None:
        try:
            self.queue.put_nowait(message)
        except asyncio.QueueFull:
            pass  # slow consumer: drop, never block the stepping task


class TeleopServer:
    """Realtime pacing simulation server with TCP wire and WebSocket gateway."""

    def __init__(
        self,
        cfg: ScenarioConfig,
        port: int,
        telemetry_rate_hz: float,
        host: str = "127.0.0.1",
        session_path: str | None = None,
        gateway_port: int | None = None,
        realtime: bool = True,
    ):
        if not 1.0 <= telemetry_rate_hz <= 100.0:
            raise ValueError("telemetry_rate_hz must lie in [1, 100]")
        steps = round(1.0 / (telemetry_rate_hz * cfg.dt))
        if steps < 1:
            raise ValueError("telemetry rate exceeds the physics rate")
        # one telemetry frame per chunk: force the log cadence to match
        self.cfg = replace(cfg, log_decimation=steps)
        self.steps_per_chunk = steps
        self.chunk_wall = steps * cfg.dt
        self.host = host
        self.port = port
        self.gateway_port = gateway_port
        self.session_path = session_path
        self.realtime = realtime
        self.engine = Engine(self.cfg)
        self.command = Command()
        self.mailbox = Command()
        self.clients: set[_Client] = set()
        self.command_client_count = 0
        self.timeline: list[TimelineEntry] = []
        self._session_file = None
        self._stop = asyncio.Event()
        self._tcp_server = None
        self._gateway = None
        self._tasks: list[asyncio.Task] = []
        self.started = asyncio.Event()

    # -- message handling (shared by TCP and WebSocket paths) --

    def handle_message(self, raw: str) -> str | None:
        """Apply one client message to the mailbox; returns an error reply or None."""
        try:
            msg = json.loads(raw)
            if not isinstance(msg, dict):
                raise ValueError("message must be a JSON object")
            mtype = msg.get("type")
            if mtype == "cmd":
                self.mailbox = replace(
                    self.mailbox, surge=_clamp(msg["surge"]), yaw=_clamp(msg["yaw"])
                )
            elif mtype == "mode":
                value = msg.get("value")
                if value not in (MODE_OPEN_LOOP, MODE_HEADING_HOLD):
                    raise ValueError(f"unknown mode {value!r}")
                self.mailbox = replace(
                    self.mailbox,
                    mode=value,
                    setpoint_deg=float(msg.get("setpoint_deg", 0.0)),
                )
            else:
                raise ValueError(f"unknown message type {msg.get('type')!r}")
            return None
        except (ValueError, KeyError, TypeError) as exc:
            return json.dumps({"type": "err", "msg": str(exc)})

    def _register(self, name: str) -> _Client:
        client = _Client(name)
        self.clients.add(client)
        self.command_client_count += 1
        return client

    def _unregister(self, client: _Client) -> None:
        self.clients.discard(client)
        self.command_client_count -= 1
        if self.command_client_count <= 0:
            # dead-man: no pilot connected, command decays to zero immediately
            self.mailbox = replace(self.mailbox, surge=0.0, yaw=0.0)

    # -- session recording --

    def _open_session(self) -> None:
        if not self.session_path:
            return
        self._session_file = open(self.session_path, "w")
        header = {
            "format": "flagellasim-session",
            "version": __version__,
            "config_sha256": self.cfg.config_hash(),
            "dt_s": self.cfg.dt,
            "steps_per_chunk": self.steps_per_chunk,
        }
        self._session_file.write(json.dumps(header, sort_keys=True) + "\n")
        self._session_file.flush()

    def _record(self, entry: TimelineEntry) -> None:
        self.timeline.append(entry)
        if self._session_file:
            self._session_file.write(
                json.dumps(
                    {
                        "tick": entry.tick,
                        "surge": entry.surge,
                        "yaw": entry.yaw,
                        "mode": entry.mode,
                        "setpoint_deg": entry.setpoint_deg,
                    }
                )
                + "\n"
            )
            self._session_file.flush()

    def _close_session(self) -> None:
        if self._session_file:
            self._session_file.write(json.dumps({"n_ticks": self.engine.tick}) + "\n")
            self._session_file.close()
            self._session_file = None

    # -- stepping --

    async def _step_loop(self) -> None:
        loop = asyncio.get_running_loop()
        out = np.zeros((1, FRAME_WIDTH))
        n_chunks = max(1, int(round(self.cfg.duration / self.chunk_wall)))
        self._record(TimelineEntry(tick=0))
        next_deadline = loop.time()
        for _ in range(n_chunks):
            if self._stop.is_set():
                break
            snap = self.mailbox
            if snap != self.command:
                if (snap.mode, snap.setpoint_deg) != (self.command.mode, self.command.setpoint_deg):
                    self.engine.reset_pid()
                self.command = snap
                self._record(
                    TimelineEntry(
                        tick=self.engine.tick,
                        surge=snap.surge,
                        yaw=snap.yaw,
                        mode=snap.mode,
                        setpoint_deg=snap.setpoint_deg,
                    )
                )
            n = self.steps_per_chunk
            surge = np.full(n, self.command.surge)
            yaw = np.full(n, self.command.yaw)
            self.engine.run_chunk(
                n, surge, yaw, self.command.mode, self.command.setpoint_deg, out, 0
            )
            message = frame_to_message(out[0])
            for client in self.clients:
                client.push(message)
            if self.realtime:
                next_deadline += self.chunk_wall
                delay = next_deadline - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
                else:
                    await asyncio.sleep(0)  # behind schedule: never skip physics
            else:
                await asyncio.sleep(0)
        self._stop.set()

    # -- TCP wire --

    async def _sender(self, client: _Client, writer: asyncio.StreamWriter) -> None:
        try:
            while True:
                msg = await client.queue.get()
                writer.write(msg.encode() + b"\n")
                await writer.drain()
        except (ConnectionError, asyncio.CancelledError):
            pass

    async def _handle_tcp(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        client = self._register("tcp")
        sender = asyncio.create_task(self._sender(client, writer))
        try:
            while not reader.at_eof():
                line = await reader.readline()
                if not line:
                    break
                text = line.decode(errors="replace").strip()
                if not text:
                    continue
                reply = self.handle_message(text)
                if reply:
                    writer.write(reply.encode() + b"\n")
                    await writer.drain()
        except ConnectionError:
            pass
        finally:
            self._unregister(client)
            sender.cancel()
            writer.close()

    # -- WebSocket gateway --

    def make_gateway_app(self):
        from fastapi import FastAPI, WebSocket, WebSocketDisconnect
        from fastapi.responses import FileResponse
        from fastapi.staticfiles import StaticFiles

        app = FastAPI(title="flagellasim teleop gateway")

        @app.websocket("/ws")
        async def ws_endpoint(websocket: WebSocket):
            await websocket.accept()
            client = self._register("ws")

            async def pump():
                while True:
                    await websocket.send_text(await client.queue.get())

            sender = asyncio.create_task(pump())
            try:
                while True:
                    reply = self.handle_message(await websocket.receive_text())
                    if reply:
                        await websocket.send_text(reply)
            except WebSocketDisconnect:
                pass
            finally:
                self._unregister(client)
                sender.cancel()

        import os

        console = Path(
            os.environ.get(
                "FLAGELLASIM_CONSOLE_DIR",
                Path(__file__).resolve().parents[2] / "frontend" / "dist",
            )
        )
        if console.is_dir():
            index = console / "index.html"

            @app.get("/")
            async def root():
                return FileResponse(index)

            app.mount("/", StaticFiles(directory=str(console)), name="console")
        return app

    async def _run_gateway(self) -> None:
        import uvicorn

        config = uvicorn.Config(
            self.make_gateway_app(),
            host=self.host,
            port=self.gateway_port,
            log_level="warning",
        )
        self._gateway = uvicorn.Server(config)
        await self._gateway.serve()

    # -- lifecycle --

    async def start(self) -> None:
        try:
            self._tcp_server = await asyncio.start_server(
                self._handle_tcp, self.host, self.port
            )
        except OSError as exc:
            raise ServerStartupError(f"cannot bind {self.host}:{self.port}: {exc}") from exc
        self._open_session()
        self._tasks.append(asyncio.create_task(self._step_loop()))
        if self.gateway_port is not None:
            self._tasks.append(asyncio.create_task(self._run_gateway()))
            for _ in range(400):  # wait for the gateway to bind
                if self._gateway is not None and getattr(self._gateway, "started", False):
                    break
                await asyncio.sleep(0.025)
        self.started.set()

    async def wait_finished(self) -> None:
        await self._stop.wait()

    async def stop(self) -> None:
        self._stop.set()
        if self._gateway is not None:
            self._gateway.should_exit = True
        if self._tasks:
            _, pending = await asyncio.wait(self._tasks, timeout=3.0)
            for t in pending:
                t.cancel()
            for t in pending:
                try:
                    await t
                except (asyncio.CancelledError, Exception):
                    pass
        if self._tcp_server is not None:
            self._tcp_server.close()
            await self._tcp_server.wait_closed()
        self._close_session()

    async def serve_until_done(self) -> None:
        """Run to completion; SIGINT/SIGTERM stop the loop and still close the
        session log cleanly."""
        import signal

        await self.start()
        loop = asyncio.get_running_loop()
        for sig in (signal.SIGINT, signal.SIGTERM):
            try:
                loop.add_signal_handler(sig, self._stop.set)
            except (NotImplementedError, RuntimeError):
                pass  # non-main thread or platform without signal support
        try:
            await self.wait_finished()
        finally:
            await self.stop()


def load_session(path: str) -> tuple[dict, list[TimelineEntry], int]:
    """Read a recorded session: (header, timeline, total ticks).

    A session truncated before its footer (server killed hard) reports
    n_ticks = -1; replay then falls back to the configured duration.
    """
    header = None
    entries: list[TimelineEntry] = []
    n_ticks = -1
    with open(path) as f:
        for line in f:
            obj = json.loads(line)
            if header is None:
                header = obj
            elif "tick" in obj:
                entries.append(
                    TimelineEntry(
                        tick=int(obj["tick"]),
                        surge=float(obj["surge"]),
                        yaw=float(obj["yaw"]),
                        mode=obj["mode"],
                        setpoint_deg=float(obj["setpoint_deg"]),
                    )
                )
            elif "n_ticks" in obj:
                n_ticks = int(obj["n_ticks"])
    if header is None:
        raise ValueError(f"{path}: empty session file")
    return header, entries, n_ticks


def replay_session(cfg: ScenarioConfig, session_path: str) -> np.ndarray:
    """Re-run a recorded pilot session in batch; frames match the live run."""
    header, timeline, n_ticks = load_session(session_path)
    if header.get("config_sha256") != cfg.config_hash():
        raise ValueError("session was recorded with a different configuration")
    cfg = replace(cfg, log_decimation=int(header["steps_per_chunk"]))
    if n_ticks < 0:
        n_ticks = cfg.n_steps  # truncated session: replay the configured duration
    return run_timeline(cfg, timeline, n_steps=n_ticks)
