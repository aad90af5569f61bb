import asyncio
import json
import socket
import threading
import time

import numpy as np
import pytest

from flagellasim.config import config_from_dict
from flagellasim.mixer import ManeuverCommand, mix
from flagellasim.runtime import Engine
from flagellasim.server import ServerStartupError, TeleopServer, replay_session

SERVER_CFG = {
    "duration_s": 30.0,
    "dt_s": 0.005,
}
RATE = 20.0


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class ServerHandle:
    def __init__(self, cfg, session_path=None, gateway=False, duration=None):
        overrides = dict(SERVER_CFG)
        if duration is not None:
            overrides["duration_s"] = duration
        self.cfg = config_from_dict({**overrides, **cfg})
        self.port = free_port()
        self.gateway_port = free_port() if gateway else None
        self.server = None
        self.loop = None
        self.session_path = session_path
        self._ready = threading.Event()
        self.thread = threading.Thread(target=self._run, daemon=True)

    def _run(self):
        async def main():
            self.loop = asyncio.get_running_loop()
            self.server = TeleopServer(
                self.cfg,
                port=self.port,
                telemetry_rate_hz=RATE,
                session_path=self.session_path,
                gateway_port=self.gateway_port,
            )
            await self.server.start()
            self._ready.set()
            try:
                await self.server.wait_finished()
            finally:
                await self.server.stop()

        asyncio.run(main())

    def __enter__(self):
        self.thread.start()
        if not self._ready.wait(timeout=20.0):
            raise RuntimeError("server failed to start")
        return self

    def __exit__(self, *exc):
        if self.loop is not None and not self.loop.is_closed():
            try:
                self.loop.call_soon_threadsafe(self.server._stop.set)
            except RuntimeError:
                pass  # loop already finished (duration elapsed)
        self.thread.join(timeout=20.0)


class WireClient:
    def __init__(self, port):
        self.sock = socket.create_connection(("127.0.0.1", port), timeout=10.0)
        self.file = self.sock.makefile("r")

    def send(self, obj):
        self.sock.sendall((json.dumps(obj) + "\n").encode())

    def next_message(self, timeout=10.0):
        self.sock.settimeout(timeout)
        return json.loads(self.file.readline())

    def next_state(self, timeout=10.0):
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            msg = self.next_message(timeout)
            if msg["type"] == "state":
                return msg
        raise TimeoutError("no state frame received")

    def close(self):
        self.file.close()
        self.sock.close()


def expected_duties(cfg, surge, yaw):
    engine = Engine(cfg)
    return mix(ManeuverCommand(surge=surge, yaw=yaw), engine.table).duties


class TestWireProtocol:
    def test_command_reflected_in_telemetry(self):
        with ServerHandle({}) as h:
            client = WireClient(h.port)
            client.next_state()
            client.send({"type": "cmd", "surge": 0.5, "yaw": 0.0})
            expected = expected_duties(h.cfg, 0.5, 0.0)
            deadline = time.monotonic() + 5.0
            seen = None
            while time.monotonic() < deadline:
                seen = np.array(client.next_state()["pair_duties"])
                if np.abs(seen - expected).max() < 1e-12:
                    break
            assert np.abs(seen - expected).max() < 1e-12
            client.close()

    def test_malformed_message_keeps_connection(self):
        with ServerHandle({}) as h:
            client = WireClient(h.port)
            client.send({"type": "wat"})
            deadline = time.monotonic() + 5.0
            got_err = False
            while time.monotonic() < deadline and not got_err:
                msg = client.next_message()
                got_err = msg["type"] == "err"
            assert got_err
            client.sock.sendall(b"this is not json\n")
            # connection stays open: state frames keep flowing
            assert client.next_state() is not None
            client.close()

    def test_latest_command_wins(self):
        with ServerHandle({}) as h:
            client = WireClient(h.port)
            client.next_state()
            client.send({"type": "cmd", "surge": 0.2, "yaw": 0.0})
            client.send({"type": "cmd", "surge": 0.0, "yaw": -0.5})
            expected = expected_duties(h.cfg, 0.0, -0.5)
            deadline = time.monotonic() + 5.0
            match = False
            while time.monotonic() < deadline and not match:
                seen = np.array(client.next_state()["pair_duties"])
                match = np.abs(seen - expected).max() < 1e-12
            assert match
            client.close()

    def test_out_of_range_clamped(self):
        with ServerHandle({}) as h:
            client = WireClient(h.port)
            client.next_state()
            client.send({"type": "cmd", "surge": 7.0, "yaw": -4.0})
            expected = expected_duties(h.cfg, 1.0, -1.0)
            deadline = time.monotonic() + 5.0
            match = False
            while time.monotonic() < deadline and not match:
                seen = np.array(client.next_state()["pair_duties"])
                match = np.abs(seen - expected).max() < 1e-12
            assert match
            client.close()

    def test_dead_man_zeroes_commands(self):
        with ServerHandle({}) as h:
            pilot = WireClient(h.port)
            pilot.next_state()
            pilot.send({"type": "cmd", "surge": 0.8, "yaw": 0.0})
            time.sleep(0.5)
            pilot.close()
            watcher = WireClient(h.port)
            time.sleep(1.0)  # within 1 s of disconnect commands must decay
            for _ in range(3):
                seen = np.array(watcher.next_state()["pair_duties"])
            assert np.abs(seen).max() == 0.0
            watcher.close()

    def test_telemetry_rate(self):
        with ServerHandle({}) as h:
            client = WireClient(h.port)
            client.next_state()
            t0 = time.monotonic()
            frames = [client.next_state() for _ in range(20)]
            elapsed = time.monotonic() - t0
            assert 20 / elapsed == pytest.approx(RATE, rel=0.5)
            sim_spacing = np.diff([f["t"] for f in frames])
            assert np.abs(sim_spacing - 1.0 / RATE).max() < 1e-9
            client.close()

    def test_mode_switch_heading_hold(self):
        with ServerHandle({}) as h:
            client = WireClient(h.port)
            client.next_state()
            client.send({"type": "mode", "value": "heading_hold", "setpoint_deg": 40.0})
            deadline = time.monotonic() + 8.0
            heading = 0.0
            while time.monotonic() < deadline and heading < 0.02:
                heading = client.next_state()["heading"]
            assert heading > 0.02
            client.close()

    def test_port_busy_raises(self):
        blocker = socket.socket()
        blocker.bind(("127.0.0.1", 0))
        port = blocker.getsockname()[1]
        blocker.listen(1)
        cfg = config_from_dict(SERVER_CFG)

        async def attempt():
            server = TeleopServer(cfg, port=port, telemetry_rate_hz=RATE)
            await server.start()

        with pytest.raises(ServerStartupError):
            asyncio.run(attempt())
        blocker.close()

    def test_rate_validation(self):
        cfg = config_from_dict(SERVER_CFG)
        with pytest.raises(ValueError):
            TeleopServer(cfg, port=free_port(), telemetry_rate_hz=0.5)
        with pytest.raises(ValueError):
            TeleopServer(cfg, port=free_port(), telemetry_rate_hz=150.0)


class TestSessionReplay:
    def test_recorded_session_replays_exactly(self, tmp_path):
        session = tmp_path / "pilot.jsonl"
        live_frames = []
        with ServerHandle({}, session_path=str(session), duration=6.0) as h:
            client = WireClient(h.port)
            live_frames.append(client.next_state())
            client.send({"type": "cmd", "surge": 0.6, "yaw": 0.0})
            t0 = time.monotonic()
            while time.monotonic() - t0 < 1.5:
                live_frames.append(client.next_state())
            client.send({"type": "cmd", "surge": 0.0, "yaw": 0.4})
            while time.monotonic() - t0 < 3.0:
                live_frames.append(client.next_state())
            client.close()  # dead-man zeroes the command for the rest
            cfg = h.cfg
        replayed = replay_session(cfg, str(session))
        by_time = {round(float(r[0]), 9): r for r in replayed}
        compared = 0
        for frame in live_frames:
            key = round(frame["t"], 9)
            assert key in by_time
            row = by_time[key]
            live_vec = np.array(
                frame["position"]
                + frame["attitude"]
                + frame["lin_vel"]
                + frame["ang_vel"]
                + frame["pair_duties"]
                + frame["motor_speeds"]
            )
            replay_vec = row[1:32]
            assert np.abs(live_vec - replay_vec).max() <= 1e-9
            compared += 1
        assert compared >= 20

    def test_truncated_session_replays_full_duration(self, tmp_path):
        # a hard-killed server leaves no footer; replay falls back to the
        # configured duration instead of producing an empty trajectory
        cfg = config_from_dict({**SERVER_CFG, "duration_s": 2.0})
        session = tmp_path / "truncated.jsonl"
        header = {
            "format": "flagellasim-session",
            "config_sha256": cfg.config_hash(),
            "dt_s": cfg.dt,
            "steps_per_chunk": 10,
        }
        entry = {"tick": 0, "surge": 0.5, "yaw": 0.0, "mode": "open_loop", "setpoint_deg": 0.0}
        session.write_text(json.dumps(header) + "\n" + json.dumps(entry) + "\n")
        frames = replay_session(cfg, str(session))
        assert len(frames) == 1 + cfg.n_steps // 10
        assert frames[-1, 1] > 0.0  # surge acted over the whole duration

    def test_replay_rejects_wrong_config(self, tmp_path):
        session = tmp_path / "pilot.jsonl"
        with ServerHandle({}, session_path=str(session), duration=1.0) as h:
            client = WireClient(h.port)
            client.next_state()
            client.close()
            time.sleep(1.2)
        other = config_from_dict({**SERVER_CFG, "duration_s": 9.0})
        with pytest.raises(ValueError):
            replay_session(other, str(session))


class TestWebSocketGateway:
    def test_ws_speaks_same_protocol(self):
        websockets = pytest.importorskip("websockets")

        with ServerHandle({}, gateway=True) as h:
            async def talk():
                uri = f"ws://127.0.0.1:{h.gateway_port}/ws"
                async with websockets.connect(uri, open_timeout=15) as ws:
                    await ws.send(json.dumps({"type": "cmd", "surge": 0.5, "yaw": 0.0}))
                    expected = expected_duties(h.cfg, 0.5, 0.0)
                    for _ in range(int(RATE * 5)):
                        msg = json.loads(await asyncio.wait_for(ws.recv(), 10))
                        if msg["type"] == "state":
                            seen = np.array(msg["pair_duties"])
                            if np.abs(seen - expected).max() < 1e-12:
                                return True
                return False

            assert asyncio.run(talk())

    def test_ws_reports_malformed(self):
        websockets = pytest.importorskip("websockets")

        with ServerHandle({}, gateway=True) as h:
            async def talk():
                uri = f"ws://127.0.0.1:{h.gateway_port}/ws"
                async with websockets.connect(uri, open_timeout=15) as ws:
                    await ws.send("not json at all")
                    for _ in range(50):
                        msg = json.loads(await asyncio.wait_for(ws.recv(), 10))
                        if msg["type"] == "err":
                            return True
                return False

            assert asyncio.run(talk())

    def test_pilot_w_then_d_roundtrip(self):
        # browser-path teleop loop: W (surge) gives forward motion, then D
        # (yaw) turns; command-to-duty round trip under 250 ms on localhost
        websockets = pytest.importorskip("websockets")

        with ServerHandle({}, gateway=True) as h:
            async def pilot():
                uri = f"ws://127.0.0.1:{h.gateway_port}/ws"
                async with websockets.connect(uri, open_timeout=15) as ws:
                    async def next_state():
                        while True:
                            msg = json.loads(await asyncio.wait_for(ws.recv(), 10))
                            if msg["type"] == "state":
                                return msg
                    await next_state()
                    t_send = time.monotonic()
                    await ws.send(json.dumps({"type": "cmd", "surge": 1.0, "yaw": 0.0}))
                    rtt = None
                    frame = None
                    for _ in range(int(RATE * 3)):
                        frame = await next_state()
                        if abs(frame["pair_duties"][2] - 1.0) < 1e-9:
                            rtt = (time.monotonic() - t_send) * 1000.0
                            break
                    assert rtt is not None and rtt < 250.0
                    end = time.monotonic() + 1.5
                    while time.monotonic() < end:
                        frame = await next_state()
                    assert frame["position"][0] > 0.0  # forward under W
                    await ws.send(json.dumps({"type": "cmd", "surge": 0.0, "yaw": -1.0}))
                    end = time.monotonic() + 1.5
                    while time.monotonic() < end:
                        frame = await next_state()
                    assert frame["heading"] < -0.01  # turning under D
                    return rtt

            rtt = asyncio.run(pilot())
            print(f"\ncommand round-trip {rtt:.0f} ms < 250 ms")
