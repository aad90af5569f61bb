"""Scenario configuration: YAML with explicit units in field names."""

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np
import yaml

from .actuation import MotorParams
from .autopilot import ImuModel, PidGains
from .ballast import WeightInventory
from .dynamics import RobotParams
from .geometry import FrameParams
from .hydro import HelixParams, LumpedQuadratic, ResistiveHelix, ThrustModel

MODE_OPEN_LOOP = "open_loop"
MODE_HEADING_HOLD = "heading_hold"


class ConfigError(ValueError):
    """Invalid scenario configuration; the message names the offending field."""


def _require(raw: dict, path: str, key: str):
    if key not in raw:
        raise ConfigError(f"{path}{key}: missing required field")
    return raw[key]


def _number(raw, path: str, key: str) -> float:
    v = _require(raw, path, key)
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(float(v)):
        raise ConfigError(f"{path}{key}: expected a finite number, got {v!r}")
    return float(v)


def _vector(raw, path: str, key: str, n: int) -> np.ndarray:
    v = _require(raw, path, key)
    if not isinstance(v, (list, tuple)) or len(v) != n:
        raise ConfigError(f"{path}{key}: expected a {n}-element list")
    return np.array([float(x) for x in v])


@dataclass(frozen=True)
class ScenarioConfig:
    frame: FrameParams
    robot: RobotParams
    motors: MotorParams
    thrust_model: ThrustModel
    imu: ImuModel
    gains: PidGains
    mode: str
    heading_setpoint_deg: float
    command_script: tuple[tuple[float, float, float], ...]
    dt: float
    duration: float
    log_decimation: int
    mixer_omega_ref: float
    ballast_inventory: WeightInventory
    raw: dict  # canonical merged dict, for hashing / provenance

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.raw, sort_keys=True).encode()
        ).hexdigest()


def default_config_dict() -> dict:
    text = resources.files("flagellasim").joinpath("data/default.yaml").read_text()
    return yaml.safe_load(text)


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def config_from_dict(overrides: dict | None = None) -> ScenarioConfig:
    raw = _merge(default_config_dict(), overrides or {})
    try:
        frame = FrameParams(
            frame_radius=_number(raw["frame"], "frame.", "frame_radius_m"),
            arm_root_offset=_number(raw["frame"], "frame.", "arm_root_offset_m"),
        )
        r = raw["robot"]
        inertia = _vector(r, "robot.", "inertia_kg_m2", 3)
        robot = RobotParams(
            dry_mass=_number(r, "robot.", "dry_mass_kg"),
            ballast_mass=_number(r, "robot.", "ballast_mass_kg"),
            displaced_volume=_number(r, "robot.", "displaced_volume_m3"),
            r_cob=_vector(r, "robot.", "r_cob_m", 3),
            inertia=np.diag(inertia),
            added_mass=_vector(r, "robot.", "added_mass_kg_kgm2", 6),
            drag_linear=_vector(r, "robot.", "drag_linear_ns_m_nms", 6),
            drag_quadratic=_vector(r, "robot.", "drag_quadratic_ns2_m2_nms2", 6),
            fluid_density=_number(r, "robot.", "fluid_density_kg_m3"),
            gravity=_number(r, "robot.", "gravity_m_s2"),
        )
        motors = MotorParams(
            omega_max=_number(raw["motors"], "motors.", "omega_max_rad_s"),
            time_constant=_number(raw["motors"], "motors.", "time_constant_s"),
        )
        tm = raw["thrust_model"]
        variant = _require(tm, "thrust_model.", "variant")
        if variant == "resistive_helix":
            h = tm["helix"]
            thrust: ThrustModel = ResistiveHelix(
                HelixParams(
                    radius=_number(h, "thrust_model.helix.", "radius_m"),
                    pitch_angle=_number(h, "thrust_model.helix.", "pitch_angle_rad"),
                    contour_length=_number(h, "thrust_model.helix.", "contour_length_m"),
                    drag_normal=_number(h, "thrust_model.helix.", "drag_normal_ns_m2"),
                    drag_tangential=_number(h, "thrust_model.helix.", "drag_tangential_ns_m2"),
                )
            )
        elif variant == "lumped_quadratic":
            q = tm["lumped"]
            thrust = LumpedQuadratic(
                k_t=_number(q, "thrust_model.lumped.", "k_t_ns2_rad2"),
                k_q=_number(q, "thrust_model.lumped.", "k_q_nms2_rad2"),
                omega_ref=_number(q, "thrust_model.lumped.", "omega_ref_rad_s"),
            )
        else:
            raise ConfigError(
                f"thrust_model.variant: unknown variant {variant!r} "
                "(expected resistive_helix or lumped_quadratic)"
            )
        imu = ImuModel(
            gyro_noise_std=_number(raw["imu"], "imu.", "gyro_noise_std_rad_s"),
            heading_noise_std=_number(raw["imu"], "imu.", "heading_noise_std_rad"),
            seed=int(_number(raw["imu"], "imu.", "seed")),
        )
        gains = PidGains(
            kp=_number(raw["gains"], "gains.", "kp"),
            ki=_number(raw["gains"], "gains.", "ki"),
            kd=_number(raw["gains"], "gains.", "kd"),
            integral_limit=_number(raw["gains"], "gains.", "integral_limit"),
        )
        mode = _require(raw, "", "mode")
        if mode not in (MODE_OPEN_LOOP, MODE_HEADING_HOLD):
            raise ConfigError(f"mode: expected open_loop or heading_hold, got {mode!r}")
        dt = _number(raw, "", "dt_s")
        if not 0.0 < dt <= 0.1:
            raise ConfigError(f"dt_s: must lie in (0, 0.1], got {dt}")
        duration = _number(raw, "", "duration_s")
        if not duration > 0:
            raise ConfigError(f"duration_s: must be > 0, got {duration}")
        decim = _require(raw, "", "log_decimation")
        if not isinstance(decim, int) or decim < 1:
            raise ConfigError(f"log_decimation: must be an integer >= 1, got {decim!r}")
        script = []
        last_t = -math.inf
        for i, entry in enumerate(raw.get("command_script") or []):
            t = _number(entry, f"command_script[{i}].", "t_start_s")
            if t < last_t:
                raise ConfigError(f"command_script[{i}].t_start_s: times must be nondecreasing")
            last_t = t
            script.append(
                (
                    t,
                    _number(entry, f"command_script[{i}].", "surge"),
                    _number(entry, f"command_script[{i}].", "yaw"),
                )
            )
        omega_ref = _number(raw["mixer"], "mixer.", "omega_ref_rad_s")
        inventory = WeightInventory(
            items=tuple(
                (
                    _number(e, f"ballast_inventory[{i}].", "mass_kg"),
                    int(_number(e, f"ballast_inventory[{i}].", "count")),
                )
                for i, e in enumerate(raw.get("ballast_inventory") or [])
            )
        )
        return ScenarioConfig(
            frame=frame,
            robot=robot,
            motors=motors,
            thrust_model=thrust,
            imu=imu,
            gains=gains,
            mode=mode,
            heading_setpoint_deg=_number(raw, "", "heading_setpoint_deg"),
            command_script=tuple(script),
            dt=dt,
            duration=duration,
            log_decimation=decim,
            mixer_omega_ref=omega_ref,
            ballast_inventory=inventory,
            raw=raw,
        )
    except ConfigError:
        raise
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"invalid configuration structure: {exc}") from exc


def load_config(path: str) -> ScenarioConfig:
    with open(path) as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_dict(data)
