"""Maneuver-command mixing: (surge, yaw) -> 6 pair duties via model-derived allocation."""

from dataclasses import dataclass

import numpy as np

from .actuation import MotorParams, PairDuties
from .geometry import ArmMount
from .hydro import ThrustModel, WrenchBody, arm_wrench


class AllocationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ManeuverCommand:
    surge: float = 0.0
    yaw: float = 0.0

    def __post_init__(self):
        if abs(self.surge) > 1.0 or abs(self.yaw) > 1.0:
            raise ValueError("surge and yaw must lie in [-1, 1]")


@dataclass(frozen=True)
class AllocationTable:
    """Per-pair unit wrenches (per unit duty, at the reference speed) and the
    duty weight vectors realizing unit surge force / unit yaw torque."""

    unit_wrenches: tuple[WrenchBody, ...]
    surge_weights: np.ndarray
    yaw_weights: np.ndarray


def pair_unit_wrenches(
    mounts: list[ArmMount],
    model: ThrustModel,
    motor: MotorParams,
    omega_ref: float,
) -> list[WrenchBody]:
    """Steady-state pair wrench per unit duty, body at rest, shafts at omega_ref."""
    duty_ref = omega_ref / motor.omega_max
    rest = (np.zeros(3), np.zeros(3))
    wrenches = []
    for pair in range(6):
        force = np.zeros(3)
        torque = np.zeros(3)
        for m in mounts:
            if m.pair_id != pair:
                continue
            w = arm_wrench(m, model, omega_ref, rest)
            force += w.force
            torque += w.torque
        wrenches.append(WrenchBody(force / duty_ref, torque / duty_ref))
    return wrenches


def _solve_weights(W: np.ndarray, target: np.ndarray, label: str) -> np.ndarray:
    sol, _, _, _ = np.linalg.lstsq(W, target, rcond=None)
    residual = np.linalg.norm(W @ sol - target)
    if residual > 1e-6 * max(1.0, np.linalg.norm(target)):
        rank = np.linalg.matrix_rank(W)
        raise AllocationError(
            f"{label} target unreachable: pair wrench matrix rank {rank} < 6 "
            f"(residual {residual:.3e}); geometry cannot realize this wrench"
        )
    peak = np.max(np.abs(sol))
    if peak == 0.0:
        raise AllocationError(f"{label} solve produced a zero weight vector")
    return sol / peak


def build_allocation(
    mounts: list[ArmMount],
    model: ThrustModel,
    motor: MotorParams,
    omega_ref: float,
) -> AllocationTable:
    """Least-squares duty weights over the 6 pair unit wrenches.

    surge_weights produce unit force along body x with zero torque; yaw_weights
    unit torque about body z with zero force.  Each vector is normalized so its
    largest |component| is 1.
    """
    if not 0.0 < omega_ref <= motor.omega_max:
        raise ValueError("omega_ref must lie in (0, omega_max]")
    unit = pair_unit_wrenches(mounts, model, motor, omega_ref)
    W = np.column_stack([np.concatenate([u.force, u.torque]) for u in unit])
    surge = _solve_weights(W, np.array([1.0, 0, 0, 0, 0, 0]), "surge force")
    yaw = _solve_weights(W, np.array([0, 0, 0, 0, 0, 1.0]), "yaw torque")
    return AllocationTable(unit_wrenches=tuple(unit), surge_weights=surge, yaw_weights=yaw)


def mix(cmd: ManeuverCommand, table: AllocationTable) -> PairDuties:
    """duties = clamp(surge*surge_weights + yaw*yaw_weights, -1, 1)."""
    raw = cmd.surge * table.surge_weights + cmd.yaw * table.yaw_weights
    return PairDuties(duties=raw)
