"""6-DOF hull dynamics: mass/added mass, drag, restoring wrench, integration.

Body-frame velocity state with diagonal added mass (marine-craft convention),
world frame z-up.  Semi-implicit Euler: velocities first from the Newton-Euler
equations with momentum coupling, then pose; the attitude quaternion is advanced
by the exponential map of ang_vel*dt and renormalized every step.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import ArmMount
from .hydro import ThrustModel, WrenchBody, arm_wrench


def quat_to_rot(q: np.ndarray) -> np.ndarray:
    """Rotation matrix (body->world) from unit quaternion [w, x, y, z]."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_exp_increment(w: np.ndarray, dt: float) -> np.ndarray:
    """Unit quaternion exp(0.5 * w * dt) for a body-frame rate w."""
    theta = math.sqrt(w[0] ** 2 + w[1] ** 2 + w[2] ** 2) * dt
    if theta < 1e-12:
        q = np.array([1.0, 0.5 * w[0] * dt, 0.5 * w[1] * dt, 0.5 * w[2] * dt])
        return q / np.linalg.norm(q)
    axis = w / np.linalg.norm(w)
    half = 0.5 * theta
    return np.concatenate([[math.cos(half)], math.sin(half) * axis])


@dataclass(frozen=True)
class BodyState:
    """position: world (m, z up); attitude: unit quaternion [w,x,y,z] body->world;
    lin_vel / ang_vel: body frame (m/s, rad/s)."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    attitude: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    lin_vel: np.ndarray = field(default_factory=lambda: np.zeros(3))
    ang_vel: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        n = np.linalg.norm(self.attitude)
        if abs(n - 1.0) > 1e-9:
            raise ValueError("attitude quaternion must be unit norm")


@dataclass(frozen=True)
class RobotParams:
    dry_mass: float
    ballast_mass: float
    displaced_volume: float
    r_cob: np.ndarray
    inertia: np.ndarray
    added_mass: np.ndarray
    drag_linear: np.ndarray
    drag_quadratic: np.ndarray
    fluid_density: float = 998.0
    gravity: float = 9.81

    def __post_init__(self):
        if not (self.dry_mass > 0 and self.ballast_mass >= 0):
            raise ValueError("masses must be positive (ballast may be zero)")
        if not self.displaced_volume > 0:
            raise ValueError("displaced_volume must be > 0")
        if not (self.fluid_density > 0 and self.gravity > 0):
            raise ValueError("fluid_density and gravity must be > 0")
        J = np.asarray(self.inertia, dtype=float)
        if J.shape != (3, 3) or not np.allclose(J, J.T):
            raise ValueError("inertia must be a symmetric 3x3 matrix")
        if np.any(np.linalg.eigvalsh(J) <= 0):
            raise ValueError("inertia must be positive definite")
        if np.any(np.asarray(self.drag_linear) < 0) or np.any(np.asarray(self.drag_quadratic) < 0):
            raise ValueError("drag coefficients must be >= 0")
        if np.any(np.asarray(self.added_mass) < 0):
            raise ValueError("added mass must be >= 0")

    @property
    def total_mass(self) -> float:
        return self.dry_mass + self.ballast_mass

    @property
    def mass_vec(self) -> np.ndarray:
        """Per-axis translational mass including added mass."""
        return self.total_mass + np.asarray(self.added_mass, dtype=float)[:3]

    @property
    def inertia_total(self) -> np.ndarray:
        return np.asarray(self.inertia, dtype=float) + np.diag(
            np.asarray(self.added_mass, dtype=float)[3:]
        )


def restoring_wrench(attitude: np.ndarray, p: RobotParams) -> WrenchBody:
    """Gravity at the CoM plus buoyancy at the CoB, both in the body frame.

    Weight (dry+ballast)*g acts down at the CoM (no torque); buoyancy
    rho*g*V acts up at r_cob, giving torque r_cob x f_buoyancy.
    """
    z_body = quat_to_rot(attitude).T @ np.array([0.0, 0.0, 1.0])
    weight = p.total_mass * p.gravity
    buoy = p.fluid_density * p.gravity * p.displaced_volume
    force = (buoy - weight) * z_body
    torque = np.cross(p.r_cob, buoy * z_body)
    return WrenchBody(force, torque)


def net_wrench(
    state: BodyState,
    motor_omegas: np.ndarray,
    mounts: list[ArmMount],
    model: ThrustModel,
    p: RobotParams,
) -> WrenchBody:
    """Sum of the 12 arm wrenches, hull drag, and the restoring wrench."""
    motor_omegas = np.asarray(motor_omegas, dtype=float)
    if motor_omegas.shape != (len(mounts),):
        raise ValueError("one shaft speed per mount required")
    total = restoring_wrench(state.attitude, p)
    for mount, omega in zip(mounts, motor_omegas):
        total = total + arm_wrench(mount, model, float(omega), (state.lin_vel, state.ang_vel))
    nu = np.concatenate([state.lin_vel, state.ang_vel])
    drag6 = -np.asarray(p.drag_linear, dtype=float) * nu - np.asarray(
        p.drag_quadratic, dtype=float
    ) * np.abs(nu) * nu
    return total + WrenchBody(drag6[:3], drag6[3:])


def integrate_step(state: BodyState, wrench: WrenchBody, p: RobotParams, dt: float) -> BodyState:
    """One semi-implicit Euler step of the body-frame Newton-Euler equations.

    (M + M_A) nu_dot = wrench - momentum coupling; velocities update first, then
    position (with the pre-step attitude) and attitude (exponential map of the
    new rate), renormalized.
    """
    if not 0.0 < dt <= 0.1:
        raise ValueError("dt must lie in (0, 0.1]")
    m = p.mass_vec
    J = p.inertia_total
    v, w = state.lin_vel, state.ang_vel
    p_lin = m * v
    L = J @ w
    acc = (wrench.force - np.cross(w, p_lin)) / m
    alpha = np.linalg.solve(J, wrench.torque - np.cross(w, L) - np.cross(v, p_lin))
    v_new = v + dt * acc
    w_new = w + dt * alpha
    pos_new = state.position + dt * (quat_to_rot(state.attitude) @ v_new)
    q_new = quat_multiply(state.attitude, quat_exp_increment(w_new, dt))
    q_new = q_new / np.linalg.norm(q_new)
    return replace(state, position=pos_new, attitude=q_new, lin_vel=v_new, ang_vel=w_new)


def kinetic_energy(state: BodyState, p: RobotParams) -> float:
    """Total kinetic energy including added-mass terms (J)."""
    v, w = state.lin_vel, state.ang_vel
    return 0.5 * float(np.dot(p.mass_vec * v, v) + np.dot(w, p.inertia_total @ w))


def roll_angle(q: np.ndarray) -> float:
    """ZYX roll angle (rad) from a unit quaternion."""
    w, x, y, z = q
    return math.atan2(2 * (w * x + y * z), 1 - 2 * (x * x + y * y))
