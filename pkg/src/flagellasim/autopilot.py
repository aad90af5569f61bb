"""Simulated IMU and PID heading hold (yaw command generation)."""

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import BodyState

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _unit_open(x: int) -> float:
    # uniform in (0, 1): top 53 bits, shifted off zero
    return ((x >> 11) + 1) / (1 << 53)


def noise_pair(seed: int, tick: int) -> tuple[float, float]:
    """Two standard normals as a pure function of (seed, tick).

    splitmix64 counter hash + Box-Muller; identical values regardless of call
    order, so batch, realtime, and replay paths agree sample-for-sample.
    """
    base = _splitmix64(seed & _MASK64)
    u1 = _unit_open(_splitmix64(base ^ _splitmix64((2 * tick) & _MASK64)))
    u2 = _unit_open(_splitmix64(base ^ _splitmix64((2 * tick + 1) & _MASK64)))
    r = math.sqrt(-2.0 * math.log(u1))
    return r * math.cos(2.0 * math.pi * u2), r * math.sin(2.0 * math.pi * u2)


def noise_arrays(seed: int, start_tick: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-tick (heading, rate) noise normals for ticks start_tick..start_tick+n-1."""
    h = np.empty(n)
    r = np.empty(n)
    for i in range(n):
        h[i], r[i] = noise_pair(seed, start_tick + i)
    return h, r


def wrap_angle(x: float) -> float:
    """Wrap to (-pi, pi]."""
    return x - 2.0 * math.pi * math.ceil((x - math.pi) / (2.0 * math.pi))


def heading_of(attitude: np.ndarray) -> float:
    """Yaw angle (rad, z-up, range (-pi, pi]) of a unit quaternion [w,x,y,z]."""
    w, x, y, z = attitude
    return wrap_angle(math.atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z)))


@dataclass(frozen=True)
class ImuModel:
    gyro_noise_std: float = 0.0
    heading_noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.gyro_noise_std < 0 or self.heading_noise_std < 0:
            raise ValueError("noise stds must be >= 0")


@dataclass(frozen=True)
class PidGains:
    """kp (1/rad), ki (1/(rad*s)), kd (s/rad), integral_limit on |ki*integral|."""

    kp: float
    ki: float
    kd: float
    integral_limit: float = 0.3

    def __post_init__(self):
        if self.kp < 0 or self.ki < 0 or self.kd < 0:
            raise ValueError("gains must be >= 0")
        if not self.integral_limit > 0:
            raise ValueError("integral_limit must be > 0")


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_error: float = 0.0


def imu_sample(state: BodyState, m: ImuModel, tick: int) -> tuple[float, float]:
    """(heading, yaw_rate) measurement with seeded Gaussian noise."""
    nh, nr = noise_pair(m.seed, tick)
    heading = wrap_angle(heading_of(state.attitude) + m.heading_noise_std * nh)
    yaw_rate = float(state.ang_vel[2]) + m.gyro_noise_std * nr
    return heading, yaw_rate


def pid_step(
    gains: PidGains,
    st: PidState,
    setpoint: float,
    measured: float,
    yaw_rate: float,
    dt: float,
) -> tuple[float, PidState]:
    """One heading-hold update returning (yaw_cmd in [-1, 1], new state).

    The derivative term uses the measured yaw rate (no derivative kick);
    integration is suspended while the output saturates in the error's sign
    and the integral contribution is clamped to +/- integral_limit.
    """
    if not dt > 0.0:
        raise ValueError("dt must be > 0")
    error = wrap_angle(setpoint - measured)
    integral = st.integral
    candidate = gains.kp * error + gains.ki * integral - gains.kd * yaw_rate
    saturated_same_sign = abs(candidate) >= 1.0 and candidate * error > 0.0
    if not saturated_same_sign:
        integral += error * dt
        if gains.ki > 0.0:
            cap = gains.integral_limit / gains.ki
            integral = min(cap, max(-cap, integral))
    out = gains.kp * error + gains.ki * integral - gains.kd * yaw_rate
    out = min(1.0, max(-1.0, out))
    return out, PidState(integral=integral, prev_error=error)
