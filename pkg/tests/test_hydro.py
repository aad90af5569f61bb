import math
from dataclasses import replace

import numpy as np
import pytest

from flagellasim.geometry import TORQUE_PAIR_IDS
from flagellasim.hydro import (
    HelixParams,
    LumpedQuadratic,
    ResistiveHelix,
    arm_wrench,
    helix_resistance,
)

from oracles import helix_resistance_oracle

# frozen from the segment oracle (100k segments) for the worked example
# R=0.02 m, psi=0.6 rad, contour 0.15 m, c_n=1.0, c_t=0.5
ORACLE_A = 0.12608841577401406
ORACLE_B = 0.0006990293141057506
ORACLE_C = 3.956463364275246e-05


def pair_wrench(mounts, model, pair_id, omega, vel):
    force = np.zeros(3)
    torque = np.zeros(3)
    for m in mounts:
        if m.pair_id == pair_id:
            w = arm_wrench(m, model, omega, vel)
            force += w.force
            torque += w.torque
    return force, torque


class TestHelixResistance:
    def test_worked_example_matches_frozen_oracle(self, helix):
        r = helix_resistance(helix)
        assert abs(r.A - ORACLE_A) / ORACLE_A < 1e-6
        assert abs(r.B - ORACLE_B) / ORACLE_B < 1e-6
        assert abs(r.C - ORACLE_C) / ORACLE_C < 1e-6

    def test_oracle_sweep_100_draws(self):
        rng = np.random.default_rng(20240817)
        for _ in range(100):
            radius = rng.uniform(0.01, 0.05)
            pitch = rng.uniform(0.15, 1.4)
            contour = rng.uniform(0.05, 0.3)
            ct = rng.uniform(0.2, 2.0)
            cn = ct * rng.uniform(1.0, 3.0)
            h = HelixParams(radius, pitch, contour, cn, ct)
            r = helix_resistance(h)
            A, B_t, B_r, C = helix_resistance_oracle(radius, pitch, contour, cn, ct)
            assert abs(r.A - A) / A < 1e-6
            assert abs(r.C - C) / C < 1e-6
            scale = max(abs(B_t), r.A * 1e-3)
            assert abs(r.B - B_t) / scale < 1e-6
            assert abs(r.B - B_r) / scale < 1e-6

    def test_isotropic_drag_has_no_coupling(self):
        h = HelixParams(0.02, 0.6, 0.15, 0.8, 0.8)
        assert abs(helix_resistance(h).B) < 1e-12

    def test_axis_parallel_filament_has_no_coupling(self, helix):
        h = replace(helix, pitch_angle=math.pi / 2 - 1e-9)
        r = helix_resistance(h)
        assert abs(r.B) < 1e-9 * r.A

    def test_passivity_determinant(self, helix):
        r = helix_resistance(helix)
        assert r.A > 0 and r.C > 0 and r.B >= 0
        det = r.A * r.C - r.B**2
        expected = (helix.contour_length * helix.radius) ** 2 * (
            helix.drag_normal * helix.drag_tangential
        )
        assert det > 0
        assert abs(det - expected) < 1e-12 * expected

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            HelixParams(-0.01, 0.6, 0.15, 1.0, 0.5)
        with pytest.raises(ValueError):
            HelixParams(0.02, 1.8, 0.15, 1.0, 0.5)
        with pytest.raises(ValueError):
            HelixParams(0.02, 0.6, 0.15, 0.4, 0.5)  # c_n < c_t
        with pytest.raises(ValueError):
            HelixParams(0.02, 0.6, 0.15, 1.0, 0.0)

    def test_resistance_matrix_invariants_enforced(self):
        from flagellasim.hydro import ResistanceMatrix

        with pytest.raises(ValueError):
            ResistanceMatrix(A=0.0, B=0.0, C=1.0)
        with pytest.raises(ValueError):
            ResistanceMatrix(A=1.0, B=-0.1, C=1.0)
        with pytest.raises(ValueError):
            ResistanceMatrix(A=1.0, B=2.0, C=1.0)  # A*C - B^2 <= 0


class TestArmWrench:
    def test_zero_motion_zero_wrench(self, mounts, model, rest):
        w = arm_wrench(mounts[0], model, 0.0, rest)
        assert np.abs(w.force).max() == 0.0
        assert np.abs(w.torque).max() == 0.0

    def test_thrust_pair_cancels_torque(self, mounts, model, helix, rest):
        # equal shaft speed on both arms of a thrust pair: net force 2*B*omega
        # along the canonical axis, reaction torques cancel
        r = helix_resistance(helix)
        omega = 12.0
        force, torque = pair_wrench(mounts, model, 2, omega, rest)
        expected = 2.0 * r.B * omega * mounts[2].axis
        assert np.abs(force - expected).max() < 1e-15
        assert np.linalg.norm(torque) < 1e-9 * np.linalg.norm(force) * 0.15

    def test_torque_pair_cancels_force(self, mounts, model, helix, rest):
        r = helix_resistance(helix)
        omega = 12.0
        force, torque = pair_wrench(mounts, model, TORQUE_PAIR_IDS[0], omega, rest)
        expected = -2.0 * r.C * omega * mounts[TORQUE_PAIR_IDS[0]].axis
        assert np.linalg.norm(force) < 1e-15
        assert np.abs(torque - expected).max() < 1e-15

    def test_wiring_flip_kills_thrust_leaves_torque(self, mounts, model, rest):
        # flipping one arm's handedness (realized as a wiring/spin flip) turns a
        # thrust pair into a torque pair: force cancels, axial torque appears
        m_a = mounts[2]
        m_b = mounts[8]
        flipped = replace(m_b, handedness=-m_b.handedness, spin_sign=-m_b.spin_sign)
        omega = 9.0
        w1 = arm_wrench(m_a, model, omega, rest)
        w2 = arm_wrench(flipped, model, omega, rest)
        force = w1.force + w2.force
        torque = w1.torque + w2.torque
        assert np.linalg.norm(force) < 1e-15
        assert np.linalg.norm(torque) > 1e-6

    def test_passivity_randomized(self, mounts, helix, model):
        # power extracted from the fluid F*U + tau*omega_rot <= 0
        r = helix_resistance(helix)
        rng = np.random.default_rng(7)
        for _ in range(200):
            U = rng.uniform(-1, 1)
            omega = rng.uniform(-30, 30)
            for h, rho in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                sigma = h * rho
                f_ax = r.B * h * omega - r.A * U
                t_ax = r.B * sigma * U - r.C * rho * omega
                # power against the arm's own motion (advance U, rotation rho*omega)
                power = f_ax * U + t_ax * (rho * omega)
                assert power <= 1e-12

    def test_oddness_resistive(self, mounts, model):
        rng = np.random.default_rng(11)
        for m in mounts:
            v = rng.normal(size=3)
            w = rng.normal(size=3)
            omega = rng.uniform(-20, 20)
            wp = arm_wrench(m, model, omega, (v, w))
            wn = arm_wrench(m, model, -omega, (-v, -w))
            assert np.abs(wp.force + wn.force).max() < 1e-12
            assert np.abs(wp.torque + wn.torque).max() < 1e-12

    def test_oddness_lumped(self, mounts):
        lumped = LumpedQuadratic(k_t=8e-5, k_q=6.7e-6, omega_ref=22.0)
        rng = np.random.default_rng(13)
        for m in mounts:
            v = rng.normal(size=3)
            w = rng.normal(size=3)
            omega = rng.uniform(-20, 20)
            wp = arm_wrench(m, lumped, omega, (v, w))
            wn = arm_wrench(m, lumped, -omega, (-v, -w))
            assert np.abs(wp.force + wn.force).max() < 1e-12
            assert np.abs(wp.torque + wn.torque).max() < 1e-12

    def test_isotropic_drag_no_thrust_any_speed(self, mounts, rest):
        iso = ResistiveHelix(HelixParams(0.02, 0.6, 0.15, 0.7, 0.7))
        for omega in (-25.0, -3.0, 4.0, 17.0):
            w = arm_wrench(mounts[2], iso, omega, rest)
            assert np.abs(w.force).max() < 1e-15

    def test_lumped_pair_behavior(self, mounts, rest):
        lumped = LumpedQuadratic(k_t=8e-5, k_q=6.7e-6, omega_ref=22.0)
        omega = 15.0
        force, torque = pair_wrench(mounts, lumped, 2, omega, rest)
        expected = 2.0 * lumped.k_t * omega * abs(omega) * mounts[2].axis
        assert np.abs(force - expected).max() < 1e-15
        assert np.linalg.norm(torque) < 1e-15
        force, torque = pair_wrench(mounts, lumped, 0, omega, rest)
        assert np.linalg.norm(force) < 1e-15
        expected_t = -2.0 * lumped.k_q * omega * abs(omega) * mounts[0].axis
        assert np.abs(torque - expected_t).max() < 1e-15

    def test_advance_drag_acts_at_zero_speed(self, mounts, model, helix):
        # a dead arm moving axially still drags: F = -A*U along its axis
        r = helix_resistance(helix)
        v = np.array([0.3, 0.0, 0.0])
        m = mounts[2]
        w = arm_wrench(m, model, 0.0, (v, np.zeros(3)))
        U = float(v @ m.axis)
        assert np.abs(w.force + r.A * U * m.axis).max() < 1e-15

    def test_rejects_nonfinite_speed(self, mounts, model, rest):
        with pytest.raises(ValueError):
            arm_wrench(mounts[0], model, math.inf, rest)
