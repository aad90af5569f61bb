"""Hydrodynamic wrench of a rotating flagellar arm.

The passively deformed arm is modeled as a steady rigid helix.  Anisotropic
resistive drag (c_t along the local tangent, c_n normal to it) integrated along
the centerline couples axial speed U and shaft speed omega to axial force F and
axial torque tau through a symmetric 2x2 resistance:

    F   = -A*U + B*omega
    tau =  B*U - C*omega          (about the rotation axis, chirality +1)

with A = L*(c_n*cos^2 psi + c_t*sin^2 psi),
     B = L*R*(c_n - c_t)*sin psi*cos psi,
     C = L*R^2*(c_n*sin^2 psi + c_t*cos^2 psi),
so A*C - B^2 = L^2*R^2*c_n*c_t > 0 (the filament only dissipates energy).

Per arm the thrust sign follows chirality*rotation while the rotational drag
torque follows rotation alone; both signs live on the mount (see geometry).
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .geometry import ArmMount


@dataclass(frozen=True)
class HelixParams:
    """Deformed-helix geometry and drag coefficients.

    radius: helix radius R (m); pitch_angle: psi in (0, pi/2), measured from the
    plane normal to the axis (pi/2 = filament parallel to axis);
    contour_length: filament arc length (m); drag_normal / drag_tangential:
    c_n, c_t in N*s/m^2 per unit filament length, c_n >= c_t > 0.
    """

    radius: float
    pitch_angle: float
    contour_length: float
    drag_normal: float
    drag_tangential: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError("helix radius must be > 0")
        if not 0.0 < self.pitch_angle < math.pi / 2.0:
            raise ValueError("pitch_angle must lie in (0, pi/2)")
        if not self.contour_length > 0.0:
            raise ValueError("contour_length must be > 0")
        if not self.drag_tangential > 0.0:
            raise ValueError("drag_tangential must be > 0")
        if self.drag_normal < self.drag_tangential:
            raise ValueError("slender-body anisotropy requires drag_normal >= drag_tangential")


@dataclass(frozen=True)
class ResistanceMatrix:
    """Axial resistance coefficients: A (N*s/m), B (N*s), C (N*m*s)."""

    A: float
    B: float
    C: float

    def __post_init__(self):
        if not (self.A > 0.0 and self.C > 0.0):
            raise ValueError("A and C must be > 0")
        if self.B < 0.0:
            raise ValueError("B must be >= 0 for chirality +1 with c_n >= c_t")
        if not self.A * self.C - self.B**2 > 0.0:
            raise ValueError("passivity requires A*C - B^2 > 0")


@dataclass(frozen=True)
class ResistiveHelix:
    helix: HelixParams

    @property
    def resistance(self) -> ResistanceMatrix:
        return helix_resistance(self.helix)


@dataclass(frozen=True)
class LumpedQuadratic:
    """Propeller-style omega*|omega| law.

    k_t: thrust coefficient (N*s^2/rad^2); k_q: torque coefficient
    (N*m*s^2/rad^2); omega_ref: reference speed fixing the advance-drag
    linearization A0 = k_t*omega_ref.
    """

    k_t: float
    k_q: float
    omega_ref: float

    def __post_init__(self):
        if not (self.k_t > 0.0 and self.k_q > 0.0):
            raise ValueError("k_t and k_q must be > 0")
        if not self.omega_ref > 0.0:
            raise ValueError("omega_ref must be > 0")

    @property
    def axial_drag(self) -> float:
        return self.k_t * self.omega_ref


ThrustModel = Union[ResistiveHelix, LumpedQuadratic]


@dataclass(frozen=True)
class WrenchBody:
    """Force (N) and torque about the CoM (N*m), body frame."""

    force: np.ndarray
    torque: np.ndarray

    def __add__(self, other: "WrenchBody") -> "WrenchBody":
        return WrenchBody(self.force + other.force, self.torque + other.torque)


ZERO_WRENCH = WrenchBody(np.zeros(3), np.zeros(3))


def helix_resistance(h: HelixParams) -> ResistanceMatrix:
    """Closed-form Gray–Hancock coefficients for a rigid helix (chirality +1)."""
    s = math.sin(h.pitch_angle)
    c = math.cos(h.pitch_angle)
    cn, ct, L, R = h.drag_normal, h.drag_tangential, h.contour_length, h.radius
    A = L * (cn * c * c + ct * s * s)
    B = L * R * (cn - ct) * s * c
    C = L * R * R * (cn * s * s + ct * c * c)
    return ResistanceMatrix(A=A, B=B, C=C)


def arm_axial_coefficients(model: ThrustModel) -> tuple[int, float, float, float]:
    """(model_flag, p0, p1, p2) packed for the step kernels.

    resistive: flag 0, (A, B, C).  lumped: flag 1, (k_t, k_q, A0).
    """
    if isinstance(model, ResistiveHelix):
        r = model.resistance
        return 0, r.A, r.B, r.C
    return 1, model.k_t, model.k_q, model.axial_drag


def arm_wrench(
    mount: ArmMount,
    model: ThrustModel,
    shaft_speed: float,
    body_vel: tuple[np.ndarray, np.ndarray],
) -> WrenchBody:
    """Wrench on the hull from one arm spinning at `shaft_speed` (rad/s).

    body_vel = (v, w): body-frame linear and angular velocity of the hull.
    U = (v + w x mount).axis is the arm's axial advance speed.  Axial thrust is
    B*handedness*omega - A*U along the mount axis; the hull receives the fluid
    torque on the filament, B*chirality*U - C*spin*omega, about the same axis.
    """
    if not math.isfinite(shaft_speed):
        raise ValueError("shaft_speed must be finite")
    v, w = body_vel
    axis = mount.axis
    U = float(np.dot(v + np.cross(w, mount.mount_point), axis))
    omega = shaft_speed
    omega_signed = mount.handedness * omega
    flag, p0, p1, p2 = arm_axial_coefficients(model)
    if flag == 0:
        A, B, C = p0, p1, p2
        f_ax = B * omega_signed - A * U
        t_ax = B * mount.chirality * U - C * mount.spin_sign * omega
    else:
        k_t, k_q, A0 = p0, p1, p2
        f_ax = k_t * omega_signed * abs(omega_signed) - A0 * U
        t_ax = -k_q * mount.spin_sign * omega * abs(omega)
    force = f_ax * axis
    torque = np.cross(mount.mount_point, force) + t_ax * axis
    return WrenchBody(force, torque)
