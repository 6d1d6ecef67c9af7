"""Hot numeric kernels.

The public names (``far_field_intensity``, ``pair_power``, ``dopri5_transfer``)
are numba-compiled unless ``COLLECTIVE_QUBIT_NUMBA=0`` was set at import time.
In that case the two sum kernels use vectorized numpy and the ODE stepper runs
as plain Python. ``benchmarks/bench_kernels.py`` compares the two paths.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit

# Status codes returned by the ODE kernel.
STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_MAX_STEPS = 2

_CHUNK = 4096


# ---------------------------------------------------------------------------
# far-field intensity  I(q) = |sum_j exp(i q.r_j)|^2 / N


def _far_field_intensity_loops(positions, qvecs):
    n = positions.shape[0]
    m = qvecs.shape[0]
    out = np.empty(m)
    for i in range(m):
        qx = qvecs[i, 0]
        qy = qvecs[i, 1]
        qz = qvecs[i, 2]
        re = 0.0
        im = 0.0
        for j in range(n):
            ph = qx * positions[j, 0] + qy * positions[j, 1] + qz * positions[j, 2]
            re += math.cos(ph)
            im += math.sin(ph)
        out[i] = (re * re + im * im) / n
    return out


def far_field_intensity_numpy(positions, qvecs):
    positions = np.ascontiguousarray(positions, dtype=float)
    qvecs = np.ascontiguousarray(qvecs, dtype=float)
    n = positions.shape[0]
    out = np.empty(qvecs.shape[0])
    for start in range(0, qvecs.shape[0], _CHUNK):
        ph = qvecs[start:start + _CHUNK] @ positions.T
        re = np.cos(ph).sum(axis=1)
        im = np.sin(ph).sum(axis=1)
        out[start:start + _CHUNK] = (re * re + im * im) / n
    return out


# ---------------------------------------------------------------------------
# exact total emitted power  (4 pi / N) sum_{j,l} cos(k4.r_jl) sinc(k |r_jl|)


def _pair_power_loops(positions, k4vec, k):
    n = positions.shape[0]
    acc = float(n)  # diagonal terms
    for j in range(n):
        for l in range(j + 1, n):
            dx = positions[j, 0] - positions[l, 0]
            dy = positions[j, 1] - positions[l, 1]
            dz = positions[j, 2] - positions[l, 2]
            r = math.sqrt(dx * dx + dy * dy + dz * dz)
            kr = k * r
            s = 1.0 if kr < 1e-8 else math.sin(kr) / kr
            acc += 2.0 * math.cos(k4vec[0] * dx + k4vec[1] * dy + k4vec[2] * dz) * s
    return 4.0 * math.pi * acc / n


def pair_power_numpy(positions, k4vec, k):
    positions = np.ascontiguousarray(positions, dtype=float)
    k4vec = np.asarray(k4vec, dtype=float)
    n = positions.shape[0]
    proj = positions @ k4vec
    acc = 0.0
    rows = max(1, _CHUNK * 64 // max(n, 1))
    for start in range(0, n, rows):
        block = positions[start:start + rows]
        diff = block[:, None, :] - positions[None, :, :]
        kr = k * np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        acc += (np.cos(proj[start:start + rows, None] - proj[None, :]) * np.sinc(kr / np.pi)).sum()
    return 4.0 * math.pi * acc / n


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) for the two-amplitude absorption equations

_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                                49.0 / 176.0, -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                                -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)


@njit
def _rabi_r(t, omega30, omega40, gamma, delta, t4, win_start, win_len, flat):
    if t < win_start or t > win_start + win_len or t < t4:
        return 0.0 + 0.0j
    if flat:
        env = omega40
    else:
        env = omega40 * math.exp(-0.5 * gamma * (t - t4))
    return omega30 * env / (2.0 * delta)


@njit
def _rhs(t, ca, cb, coef, omega30, omega40, gamma, delta, t4, win_start, win_len, flat):
    r = _rabi_r(t, omega30, omega40, gamma, delta, t4, win_start, win_len, flat)
    dca = -1j * coef * r * cb
    dcb = -1j * coef * r.conjugate() * ca
    return dca, dcb


@njit
def _dopri5_transfer(t_start, t_stop, ca, cb, coef, omega30, omega40, gamma, delta,
                        t4, win_start, win_len, flat, rtol, atol, h_init, max_steps):
    t = t_start
    span = t_stop - t_start
    h = h_init if h_init > 0.0 else span / 200.0
    h_min = 1e-14 * max(abs(t_stop), span)
    n_acc = 0
    n_rej = 0
    max_rise = 0.0
    status = STATUS_OK
    if span <= 0.0:
        return ca, cb, t, n_acc, n_rej, status, max_rise
    args = (coef, omega30, omega40, gamma, delta, t4, win_start, win_len, flat)
    k1a, k1b = _rhs(t, ca, cb, *args)
    while t < t_stop:
        if n_acc + n_rej >= max_steps:
            status = STATUS_MAX_STEPS
            break
        if t + h > t_stop:
            h = t_stop - t
        y2a = ca + h * _A21 * k1a
        y2b = cb + h * _A21 * k1b
        k2a, k2b = _rhs(t + h / 5.0, y2a, y2b, *args)
        y3a = ca + h * (_A31 * k1a + _A32 * k2a)
        y3b = cb + h * (_A31 * k1b + _A32 * k2b)
        k3a, k3b = _rhs(t + 3.0 * h / 10.0, y3a, y3b, *args)
        y4a = ca + h * (_A41 * k1a + _A42 * k2a + _A43 * k3a)
        y4b = cb + h * (_A41 * k1b + _A42 * k2b + _A43 * k3b)
        k4a, k4b = _rhs(t + 4.0 * h / 5.0, y4a, y4b, *args)
        y5a = ca + h * (_A51 * k1a + _A52 * k2a + _A53 * k3a + _A54 * k4a)
        y5b = cb + h * (_A51 * k1b + _A52 * k2b + _A53 * k3b + _A54 * k4b)
        k5a, k5b = _rhs(t + 8.0 * h / 9.0, y5a, y5b, *args)
        y6a = ca + h * (_A61 * k1a + _A62 * k2a + _A63 * k3a + _A64 * k4a + _A65 * k5a)
        y6b = cb + h * (_A61 * k1b + _A62 * k2b + _A63 * k3b + _A64 * k4b + _A65 * k5b)
        k6a, k6b = _rhs(t + h, y6a, y6b, *args)
        na = ca + h * (_B1 * k1a + _B3 * k3a + _B4 * k4a + _B5 * k5a + _B6 * k6a)
        nb = cb + h * (_B1 * k1b + _B3 * k3b + _B4 * k4b + _B5 * k5b + _B6 * k6b)
        k7a, k7b = _rhs(t + h, na, nb, *args)
        ea = h * (_E1 * k1a + _E3 * k3a + _E4 * k4a + _E5 * k5a + _E6 * k6a + _E7 * k7a)
        eb = h * (_E1 * k1b + _E3 * k3b + _E4 * k4b + _E5 * k5b + _E6 * k6b + _E7 * k7b)
        sa = atol + rtol * max(abs(ca), abs(na))
        sb = atol + rtol * max(abs(cb), abs(nb))
        err = math.sqrt(0.5 * ((abs(ea) / sa) ** 2 + (abs(eb) / sb) ** 2))
        if err <= 1.0:
            old_norm = abs(ca) ** 2 + abs(cb) ** 2
            new_norm = abs(na) ** 2 + abs(nb) ** 2
            if new_norm - old_norm > max_rise:
                max_rise = new_norm - old_norm
            t = t + h
            ca = na
            cb = nb
            k1a = k7a
            k1b = k7b
            n_acc += 1
            fac = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
        else:
            n_rej += 1
            fac = max(0.2, 0.9 * err ** -0.2)
        h = h * fac
        if h < h_min and t < t_stop:
            status = STATUS_STEP_UNDERFLOW
            break
    return ca, cb, t, n_acc, n_rej, status, max_rise


# ---------------------------------------------------------------------------
# dispatch

if USE_NUMBA:
    far_field_intensity = njit(_far_field_intensity_loops)
    pair_power = njit(_pair_power_loops)
else:
    far_field_intensity = far_field_intensity_numpy
    pair_power = pair_power_numpy

dopri5_transfer = _dopri5_transfer


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
