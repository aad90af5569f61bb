"""Deterministic stepping loop, trajectory logging, and session replay."""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .autopilot import noise_arrays
from .config import MODE_HEADING_HOLD, MODE_OPEN_LOOP, ScenarioConfig
from .dynamics import BodyState
from .geometry import dodecahedron_mounts
from .hydro import arm_axial_coefficients
from .kernels import (
    FRAME_WIDTH,
    MODE_HEADING_HOLD as K_HEADING_HOLD,
    MODE_OPEN_LOOP as K_OPEN_LOOP,
    run_steps_core,
)
from .mixer import build_allocation

FRAME_FIELDS = (
    ["t"]
    + [f"position_{c}" for c in "xyz"]
    + [f"attitude_{c}" for c in "wxyz"]
    + [f"lin_vel_{c}" for c in "xyz"]
    + [f"ang_vel_{c}" for c in "xyz"]
    + [f"pair_duty_{j}" for j in range(6)]
    + [f"motor_speed_{a}" for a in range(12)]
    + ["heading"]
)


class NonFiniteStateError(RuntimeError):
    def __init__(self, frame_index: int, tick: int):
        super().__init__(
            f"simulation state became non-finite at frame {frame_index} (tick {tick})"
        )
        self.frame_index = frame_index
        self.tick = tick


@dataclass(frozen=True)
class TimelineEntry:
    """Effective command from `tick` (inclusive) until the next entry."""

    tick: int
    surge: float = 0.0
    yaw: float = 0.0
    mode: str = MODE_OPEN_LOOP
    setpoint_deg: float = 0.0


@dataclass
class Engine:
    """Packed, kernel-ready scenario. Owns the mutable stepping state."""

    cfg: ScenarioConfig
    state: np.ndarray = field(init=False)
    motors: np.ndarray = field(init=False)
    pid: np.ndarray = field(init=False)
    tick: int = field(init=False, default=0)

    def __post_init__(self):
        cfg = self.cfg
        mounts = dodecahedron_mounts(cfg.frame)
        self.mounts = mounts
        self.axes = np.array([m.axis for m in mounts])
        self.mount_r = np.array([m.mount_point for m in mounts])
        self.hand = np.array([float(m.handedness) for m in mounts])
        self.spin = np.array([float(m.spin_sign) for m in mounts])
        self.pair_idx = np.array([m.pair_id for m in mounts], dtype=np.int64)
        self.model_flag, self.mp0, self.mp1, self.mp2 = arm_axial_coefficients(
            cfg.thrust_model
        )
        self.table = build_allocation(mounts, cfg.thrust_model, cfg.motors, cfg.mixer_omega_ref)
        self.motor_decay = math.exp(-cfg.dt / cfg.motors.time_constant)
        self.mass_vec = cfg.robot.mass_vec
        self.jtot = cfg.robot.inertia_total
        self.jinv = np.linalg.inv(self.jtot)
        self.weight_n = cfg.robot.total_mass * cfg.robot.gravity
        self.buoy_n = cfg.robot.fluid_density * cfg.robot.gravity * cfg.robot.displaced_volume
        self.reset()

    def reset(self, initial_state: BodyState | None = None):
        s = initial_state or BodyState()
        self.state = np.concatenate([s.position, s.attitude, s.lin_vel, s.ang_vel]).astype(
            float
        )
        self.motors = np.zeros(12)
        self.pid = np.zeros(2)
        self.tick = 0

    def reset_pid(self):
        self.pid[:] = 0.0

    def initial_frame(self) -> np.ndarray:
        from .kernels import heading_from_quat

        row = np.zeros(FRAME_WIDTH)
        row[0] = self.tick * self.cfg.dt
        row[1:14] = self.state
        row[20:32] = self.motors
        row[32] = heading_from_quat(*self.state[3:7])
        return row

    def run_chunk(
        self,
        n_steps: int,
        surge: np.ndarray,
        yaw: np.ndarray,
        mode: str,
        setpoint_deg: float,
        out: np.ndarray,
        out_row: int,
    ) -> int:
        """Advance n_steps, logging into `out` from `out_row`; returns rows written."""
        cfg = self.cfg
        if mode == MODE_HEADING_HOLD:
            mode_flag = K_HEADING_HOLD
            noise_h, noise_r = noise_arrays(cfg.imu.seed, self.tick, n_steps)
        else:
            mode_flag = K_OPEN_LOOP
            noise_h = np.zeros(0)
            noise_r = np.zeros(0)
        rows, err, bad_tick = run_steps_core(
            self.state,
            self.motors,
            self.pid,
            n_steps,
            self.tick,
            surge,
            yaw,
            mode_flag,
            math.radians(setpoint_deg),
            noise_h,
            noise_r,
            cfg.gains.kp,
            cfg.gains.ki,
            cfg.gains.kd,
            cfg.gains.integral_limit,
            cfg.imu.heading_noise_std,
            cfg.imu.gyro_noise_std,
            self.axes,
            self.mount_r,
            self.hand,
            self.spin,
            self.pair_idx,
            self.model_flag,
            self.mp0,
            self.mp1,
            self.mp2,
            self.table.surge_weights,
            self.table.yaw_weights,
            cfg.motors.omega_max,
            self.motor_decay,
            self.mass_vec,
            self.jtot,
            self.jinv,
            np.asarray(cfg.robot.drag_linear, dtype=float),
            np.asarray(cfg.robot.drag_quadratic, dtype=float),
            self.weight_n,
            self.buoy_n,
            np.asarray(cfg.robot.r_cob, dtype=float),
            cfg.dt,
            cfg.log_decimation,
            out,
            out_row,
        )
        self.tick += n_steps
        if err:
            raise NonFiniteStateError(out_row + rows - 1, bad_tick)
        return rows

    def body_state(self) -> BodyState:
        s = self.state
        return BodyState(
            position=s[0:3].copy(),
            attitude=s[3:7].copy(),
            lin_vel=s[7:10].copy(),
            ang_vel=s[10:13].copy(),
        )


def script_timeline(cfg: ScenarioConfig) -> list[TimelineEntry]:
    """Step-hold command script -> timeline, carrying the configured mode."""
    entries = [
        TimelineEntry(
            tick=0, surge=0.0, yaw=0.0, mode=cfg.mode, setpoint_deg=cfg.heading_setpoint_deg
        )
    ]
    for t_start, surge, yaw in cfg.command_script:
        tick = int(round(t_start / cfg.dt))
        entries.append(
            TimelineEntry(
                tick=max(0, tick),
                surge=surge,
                yaw=yaw,
                mode=cfg.mode,
                setpoint_deg=cfg.heading_setpoint_deg,
            )
        )
    return entries


def run_timeline(
    cfg: ScenarioConfig,
    timeline: list[TimelineEntry],
    initial_state: BodyState | None = None,
    n_steps: int | None = None,
) -> np.ndarray:
    """Run a command timeline; returns the frame array (initial frame included).

    The PID state is reset whenever an entry switches mode, mirroring the live
    server, so recorded sessions replay bit-identically.
    """
    n = cfg.n_steps if n_steps is None else n_steps
    engine = Engine(cfg)
    engine.reset(initial_state)
    surge = np.zeros(n)
    yaw = np.zeros(n)
    entries = sorted(timeline, key=lambda e: e.tick)
    boundaries = []
    prev_mode = None
    for e in entries:
        if e.tick >= n:
            continue
        surge[e.tick :] = min(1.0, max(-1.0, e.surge))
        yaw[e.tick :] = min(1.0, max(-1.0, e.yaw))
        if prev_mode is None or e.mode != prev_mode[0] or e.setpoint_deg != prev_mode[1]:
            boundaries.append((e.tick, e.mode, e.setpoint_deg))
            prev_mode = (e.mode, e.setpoint_deg)
    if not boundaries or boundaries[0][0] != 0:
        boundaries.insert(0, (0, MODE_OPEN_LOOP, 0.0))
    n_frames = 1 + n // cfg.log_decimation
    out = np.zeros((n_frames, FRAME_WIDTH))
    out[0] = engine.initial_frame()
    row = 1
    for i, (tick0, mode, setpoint) in enumerate(boundaries):
        tick1 = boundaries[i + 1][0] if i + 1 < len(boundaries) else n
        if tick1 <= tick0:
            continue
        if i > 0:
            engine.reset_pid()
        row += engine.run_chunk(
            tick1 - tick0, surge[tick0:tick1], yaw[tick0:tick1], mode, setpoint, out, row
        )
    return out[:row]


def run_scenario(cfg: ScenarioConfig, initial_state: BodyState | None = None) -> np.ndarray:
    """Fixed-step batch run of the configured scenario."""
    return run_timeline(cfg, script_timeline(cfg), initial_state=initial_state)


def log_header(cfg: ScenarioConfig) -> str:
    return json.dumps(
        {
            "format": "flagellasim-trajectory",
            "version": __version__,
            "config_sha256": cfg.config_hash(),
            "dt_s": cfg.dt,
            "log_decimation": cfg.log_decimation,
            "fields": FRAME_FIELDS,
        },
        sort_keys=True,
    )


def format_log(cfg: ScenarioConfig, frames: np.ndarray) -> str:
    """Newline-delimited trajectory log: JSON header line, then one frame per line."""
    lines = [log_header(cfg)]
    for row in frames:
        lines.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def write_log(path: str, cfg: ScenarioConfig, frames: np.ndarray) -> None:
    with open(path, "w") as f:
        f.write(format_log(cfg, frames))


def read_log(path: str) -> tuple[dict, np.ndarray]:
    with open(path) as f:
        header = json.loads(f.readline())
        frames = [[float(tok) for tok in line.split()] for line in f if line.strip()]
    return header, np.array(frames)
