"""Pair-wired motor model: 6 duty channels driving 12 geared DC motors."""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ArmMount


@dataclass(frozen=True)
class MotorParams:
    """omega_max: no-load speed at full duty (rad/s); time_constant: first-order lag (s)."""

    omega_max: float = 31.4
    time_constant: float = 0.15

    def __post_init__(self):
        if not self.omega_max > 0.0:
            raise ValueError("omega_max must be > 0")
        if not self.time_constant > 0.0:
            raise ValueError("time_constant must be > 0")


@dataclass(frozen=True)
class MotorState:
    omega: float = 0.0


@dataclass(frozen=True)
class PairDuties:
    """Six signed duty commands, one per driver channel, clamped to [-1, 1]."""

    duties: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.duties, dtype=float)
        if d.shape != (6,):
            raise ValueError("duties must be a 6-vector")
        object.__setattr__(self, "duties", np.clip(d, -1.0, 1.0))


def expand_pairs(duties: PairDuties, mounts: list[ArmMount]) -> np.ndarray:
    """Per-arm signed duties: arm i receives duties[pair_of(i)].

    Both arms of a pair always see the identical duty (parallel wiring leaves
    6 command channels for 12 motors).
    """
    return np.array([duties.duties[m.pair_id] for m in mounts])


def motor_step(state: MotorState, duty: float, p: MotorParams, dt: float) -> MotorState:
    """Exact discretization of the first-order lag toward duty*omega_max.

    omega' = target + (omega - target) * exp(-dt/tau); stable for any dt and
    composes exactly (dt then dt equals 2*dt).
    """
    if not dt > 0.0:
        raise ValueError("dt must be > 0")
    duty = min(1.0, max(-1.0, duty))
    target = duty * p.omega_max
    decay = math.exp(-dt / p.time_constant)
    return MotorState(omega=target + (state.omega - target) * decay)
