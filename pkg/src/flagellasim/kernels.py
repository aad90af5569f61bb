"""Fused stepping kernels for the simulation hot loop.

One physics step is: pair duties -> 12 motor lags -> 12 arm wrenches + hull
drag + restoring wrench -> semi-implicit Newton-Euler update.  The whole
fixed-step loop (including the optional heading-hold PID) runs inside
`run_steps_core` so batch runs, the realtime server, and replays share one
bit-identical code path.

Kernels are compiled with numba's @njit (IEEE semantics, no fastmath) unless
the environment variable FLAGELLASIM_NO_NUMBA is set nonempty, in which case
the same source runs as pure Python over NumPy arrays.  Module-level physics
functions (dynamics.py, hydro.py) are the readable references; the test suite
cross-validates both paths.
"""

import math
import os

import numpy as np

USING_NUMBA = not os.environ.get("FLAGELLASIM_NO_NUMBA")

if USING_NUMBA:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USING_NUMBA = False

# TelemetryFrame columns: t, position(3), attitude(4), lin_vel(3), ang_vel(3),
# pair_duties(6), motor_speeds(12), heading
FRAME_WIDTH = 33

MODEL_RESISTIVE = 0
MODEL_LUMPED = 1

MODE_OPEN_LOOP = 0
MODE_HEADING_HOLD = 1


def wrap_pi(x):
    """Wrap an angle to (-pi, pi]."""
    return x - 2.0 * math.pi * math.ceil((x - math.pi) / (2.0 * math.pi))


def heading_from_quat(qw, qx, qy, qz):
    return wrap_pi(math.atan2(2.0 * (qw * qz + qx * qy), 1.0 - 2.0 * (qy * qy + qz * qz)))


def pid_core(kp, ki, kd, ilim, integral, setpoint, measured, yaw_rate, dt):
    """Conditional-integration PID; returns (output in [-1,1], integral, error)."""
    error = wrap_pi(setpoint - measured)
    candidate = kp * error + ki * integral - kd * yaw_rate
    if not (abs(candidate) >= 1.0 and candidate * error > 0.0):
        integral += error * dt
        if ki > 0.0:
            cap = ilim / ki
            if integral > cap:
                integral = cap
            elif integral < -cap:
                integral = -cap
    out = kp * error + ki * integral - kd * yaw_rate
    if out > 1.0:
        out = 1.0
    elif out < -1.0:
        out = -1.0
    return out, integral, error


def run_steps_core(
    state,          # (13,) pos3 quat4 lin3 ang3, updated in place
    motors,         # (12,) shaft speeds, updated in place
    pid,            # (2,) integral, prev_error, updated in place
    n_steps,
    start_tick,
    surge_arr,      # (n_steps,) commanded surge per local step
    yaw_arr,        # (n_steps,) commanded yaw (ignored under heading hold)
    mode_flag,
    setpoint,
    noise_h,        # (n_steps,) heading noise normals (heading hold only)
    noise_r,        # (n_steps,) rate noise normals
    kp, ki, kd, ilim,
    heading_noise_std, gyro_noise_std,
    axes,           # (12,3) outward unit axes
    mount_r,        # (12,3) mount points
    hand,           # (12,) handedness = chirality*spin
    spin,           # (12,) spin sign (wiring polarity)
    pair_idx,       # (12,) int pair ids
    model_flag, mp0, mp1, mp2,
    surge_w, yaw_w,  # (6,) allocation weights
    omega_max, motor_decay,
    mass_vec,       # (3,) translational mass incl. added
    jtot, jinv,     # (3,3) rotational inertia incl. added, and inverse
    dlin, dquad,    # (6,) drag coefficients
    weight_n, buoy_n,
    r_cob,          # (3,)
    dt,
    log_decim,
    out,            # (nrows, FRAME_WIDTH) preallocated frame buffer
    out_row,        # first row to write
):
    """Advance n_steps; log a frame after every log_decim-th global tick.

    Returns (rows_written, error_flag, bad_tick): error_flag 1 means a
    non-finite value appeared in the frame logged at global tick bad_tick.
    """
    rows = 0
    duties = np.zeros(6)
    for k in range(n_steps):
        tick = start_tick + k
        px, py, pz = state[0], state[1], state[2]
        qw, qx, qy, qz = state[3], state[4], state[5], state[6]
        vx, vy, vz = state[7], state[8], state[9]
        wx, wy, wz = state[10], state[11], state[12]

        # rotation matrix body->world from the unit quaternion
        r00 = 1.0 - 2.0 * (qy * qy + qz * qz)
        r01 = 2.0 * (qx * qy - qw * qz)
        r02 = 2.0 * (qx * qz + qw * qy)
        r10 = 2.0 * (qx * qy + qw * qz)
        r11 = 1.0 - 2.0 * (qx * qx + qz * qz)
        r12 = 2.0 * (qy * qz - qw * qx)
        r20 = 2.0 * (qx * qz - qw * qy)
        r21 = 2.0 * (qy * qz + qw * qx)
        r22 = 1.0 - 2.0 * (qx * qx + qy * qy)

        # command for this step
        surge = surge_arr[k]
        if mode_flag == MODE_HEADING_HOLD:
            measured = heading_from_quat(qw, qx, qy, qz) + heading_noise_std * noise_h[k]
            rate = wz + gyro_noise_std * noise_r[k]
            yaw, new_integral, err = pid_core(
                kp, ki, kd, ilim, pid[0], setpoint, measured, rate, dt
            )
            pid[0] = new_integral
            pid[1] = err
        else:
            yaw = yaw_arr[k]

        for j in range(6):
            d = surge * surge_w[j] + yaw * yaw_w[j]
            if d > 1.0:
                d = 1.0
            elif d < -1.0:
                d = -1.0
            duties[j] = d

        # exact first-order motor lag toward duty*omega_max
        for a in range(12):
            target = duties[pair_idx[a]] * omega_max
            motors[a] = target + (motors[a] - target) * motor_decay

        # arm wrenches
        fx = 0.0
        fy = 0.0
        fz = 0.0
        tx = 0.0
        ty = 0.0
        tz = 0.0
        for a in range(12):
            ax, ay, az = axes[a, 0], axes[a, 1], axes[a, 2]
            mxp, myp, mzp = mount_r[a, 0], mount_r[a, 1], mount_r[a, 2]
            # axial advance speed U = (v + w x mount) . axis
            ux = vx + wy * mzp - wz * myp
            uy = vy + wz * mxp - wx * mzp
            uz = vz + wx * myp - wy * mxp
            U = ux * ax + uy * ay + uz * az
            om = motors[a]
            h = hand[a]
            rho = spin[a]
            if model_flag == MODEL_RESISTIVE:
                f_ax = mp1 * h * om - mp0 * U
                t_ax = mp1 * (h * rho) * U - mp2 * rho * om
            else:
                oms = h * om
                f_ax = mp0 * oms * abs(oms) - mp2 * U
                t_ax = -mp1 * rho * om * abs(om)
            fxa = f_ax * ax
            fya = f_ax * ay
            fza = f_ax * az
            fx += fxa
            fy += fya
            fz += fza
            tx += myp * fza - mzp * fya + t_ax * ax
            ty += mzp * fxa - mxp * fza + t_ax * ay
            tz += mxp * fya - myp * fxa + t_ax * az

        # hull drag, componentwise linear + quadratic
        fx -= dlin[0] * vx + dquad[0] * abs(vx) * vx
        fy -= dlin[1] * vy + dquad[1] * abs(vy) * vy
        fz -= dlin[2] * vz + dquad[2] * abs(vz) * vz
        tx -= dlin[3] * wx + dquad[3] * abs(wx) * wx
        ty -= dlin[4] * wy + dquad[4] * abs(wy) * wy
        tz -= dlin[5] * wz + dquad[5] * abs(wz) * wz

        # restoring: weight at CoM down, buoyancy at CoB up (world z into body)
        zbx, zby, zbz = r20, r21, r22
        net = buoy_n - weight_n
        fx += net * zbx
        fy += net * zby
        fz += net * zbz
        bx = buoy_n * zbx
        by = buoy_n * zby
        bz = buoy_n * zbz
        tx += r_cob[1] * bz - r_cob[2] * by
        ty += r_cob[2] * bx - r_cob[0] * bz
        tz += r_cob[0] * by - r_cob[1] * bx

        # Newton-Euler with added mass and momentum coupling
        plx = mass_vec[0] * vx
        ply = mass_vec[1] * vy
        plz = mass_vec[2] * vz
        llx = jtot[0, 0] * wx + jtot[0, 1] * wy + jtot[0, 2] * wz
        lly = jtot[1, 0] * wx + jtot[1, 1] * wy + jtot[1, 2] * wz
        llz = jtot[2, 0] * wx + jtot[2, 1] * wy + jtot[2, 2] * wz
        gx = fx - (wy * plz - wz * ply)
        gy = fy - (wz * plx - wx * plz)
        gz = fz - (wx * ply - wy * plx)
        hx = tx - (wy * llz - wz * lly) - (vy * plz - vz * ply)
        hy = ty - (wz * llx - wx * llz) - (vz * plx - vx * plz)
        hz = tz - (wx * lly - wy * llx) - (vx * ply - vy * plx)
        vx += dt * gx / mass_vec[0]
        vy += dt * gy / mass_vec[1]
        vz += dt * gz / mass_vec[2]
        wx += dt * (jinv[0, 0] * hx + jinv[0, 1] * hy + jinv[0, 2] * hz)
        wy += dt * (jinv[1, 0] * hx + jinv[1, 1] * hy + jinv[1, 2] * hz)
        wz += dt * (jinv[2, 0] * hx + jinv[2, 1] * hy + jinv[2, 2] * hz)

        # pose: position with the pre-step attitude, then attitude by exp map
        px += dt * (r00 * vx + r01 * vy + r02 * vz)
        py += dt * (r10 * vx + r11 * vy + r12 * vz)
        pz += dt * (r20 * vx + r21 * vy + r22 * vz)

        wn = math.sqrt(wx * wx + wy * wy + wz * wz)
        theta = wn * dt
        if theta < 1e-12:
            dw, dx_, dy_, dz_ = 1.0, 0.5 * wx * dt, 0.5 * wy * dt, 0.5 * wz * dt
        else:
            half = 0.5 * theta
            sh = math.sin(half) / wn
            dw, dx_, dy_, dz_ = math.cos(half), sh * wx, sh * wy, sh * wz
        nqw = qw * dw - qx * dx_ - qy * dy_ - qz * dz_
        nqx = qw * dx_ + qx * dw + qy * dz_ - qz * dy_
        nqy = qw * dy_ - qx * dz_ + qy * dw + qz * dx_
        nqz = qw * dz_ + qx * dy_ - qy * dx_ + qz * dw
        qn = math.sqrt(nqw * nqw + nqx * nqx + nqy * nqy + nqz * nqz)
        qw, qx, qy, qz = nqw / qn, nqx / qn, nqy / qn, nqz / qn

        state[0], state[1], state[2] = px, py, pz
        state[3], state[4], state[5], state[6] = qw, qx, qy, qz
        state[7], state[8], state[9] = vx, vy, vz
        state[10], state[11], state[12] = wx, wy, wz

        if (tick + 1) % log_decim == 0:
            row = out_row + rows
            out[row, 0] = (tick + 1) * dt
            for i in range(13):
                out[row, 1 + i] = state[i]
            for j in range(6):
                out[row, 14 + j] = duties[j]
            for a in range(12):
                out[row, 20 + a] = motors[a]
            out[row, 32] = heading_from_quat(qw, qx, qy, qz)
            rows += 1
            for i in range(FRAME_WIDTH):
                if not math.isfinite(out[row, i]):
                    return rows, 1, tick + 1
    return rows, 0, -1


if USING_NUMBA:
    wrap_pi = _njit(cache=True)(wrap_pi)
    heading_from_quat = _njit(cache=True)(heading_from_quat)
    pid_core = _njit(cache=True)(pid_core)
    run_steps_core = _njit(cache=True)(run_steps_core)
