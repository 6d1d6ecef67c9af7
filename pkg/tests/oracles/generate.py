"""Independent reference values for the test suite.

Nothing here imports the package. Values come from direct numerical
integration (scipy.integrate), exact Poisson tails (scipy.stats), a second
ODE integrator, or closed forms evaluated in extended precision (mpmath).

Regenerate with ``python tests/oracles/generate.py`` and commit the JSON.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import mpmath as mp
import numpy as np
from scipy import integrate, stats

OUT = Path(__file__).with_name("frozen.json")
mp.mp.dps = 40

TAU = 27e-9
GAMMA = 1.0 / TAU


def cloud(w_f, lambda_f=1.06, T_rel=0.05):
    w_a = math.sqrt(1.5 * T_rel) * w_f
    xi = math.pi * w_f / lambda_f
    return w_a, xi


def atoms_by_quadrature(w_f, n0_cm3, lambda_f=1.06, T_rel=0.05):
    """Integrate n0 exp(-(rho^2 + z^2/xi^2)/w_a^2) over all space (um^3)."""
    w_a, xi = cloud(w_f, lambda_f, T_rel)
    n0 = n0_cm3 * 1e-12
    radial, _ = integrate.quad(lambda r: 2 * math.pi * r * math.exp(-(r / w_a) ** 2), 0, np.inf)
    axial, _ = integrate.quad(lambda z: math.exp(-(z / (xi * w_a)) ** 2), -np.inf, np.inf)
    return n0 * radial * axial


def cone_fraction_over_4pi(w_a, wavelength=0.78, prefactor=1.0):
    k = 2 * math.pi / wavelength
    w0 = math.sqrt(2) * w_a
    return prefactor * 2 * math.pi / (k * w0) ** 2 / (4 * math.pi)


def poisson_threshold_error(s, b):
    ks = np.arange(1, int(s + b + 20 * math.sqrt(s + b + 1) + 50))
    miss = stats.poisson.cdf(ks - 1, s + b)
    false_alarm = stats.poisson.sf(ks - 1, b)
    err = 0.5 * (miss + false_alarm)
    i = int(np.argmin(err))
    return float(err[i]), int(ks[i])


def first_time_below(rate, background, target, t_grid):
    for t in t_grid:
        if poisson_threshold_error(rate * t, background * t)[0] <= target:
            return float(t)
    return None


def transfer_closed_form(delta_over_gamma):
    """c_a = cos(theta), theta = (pi/2) / (1 + i / (2 delta/gamma))."""
    eps = mp.mpf(1) / (2 * delta_over_gamma)
    theta = (mp.pi / 2) / (1 + 1j * eps)
    ca, cb = mp.cos(theta), -1j * mp.sin(theta)
    return float(abs(ca) ** 2), float(abs(cb) ** 2)


def transfer_by_solve_ivp(delta_over_gamma, N=1000.0, omega_40=2 * math.pi * 0.9e6):
    gamma = GAMMA
    delta = delta_over_gamma * gamma
    t_R = 20 / gamma
    area = omega_40 * (2 / gamma) * (1 - math.exp(-0.5 * gamma * t_R))
    omega_30 = math.pi * 2 * delta / (math.sqrt(N) * area)
    coef = math.sqrt(N) / (2 * (1 + 1j * gamma / (2 * delta)))

    def rhs(t, y):
        ca, cb = y[0] + 1j * y[1], y[2] + 1j * y[3]
        om = omega_30 * omega_40 * math.exp(-0.5 * gamma * t) / (2 * delta)
        dca = -1j * coef * om * cb
        dcb = -1j * coef * om * ca
        return [dca.real, dca.imag, dcb.real, dcb.imag]

    sol = integrate.solve_ivp(rhs, (0, t_R), [1, 0, 0, 0], method="DOP853",
                              rtol=1e-12, atol=1e-14)
    y = sol.y[:, -1]
    return float(y[0] ** 2 + y[1] ** 2), float(y[2] ** 2 + y[3] ** 2), omega_30


def expected_lobe_fraction(w_f, N, wavelength=0.78):
    """Phase-matched share of the cloud-averaged far field, C_eff / (1 + C_eff).

    Averaging |sum_j exp(i q.r_j)|^2 / N over Gaussian positions gives
    1 + (N-1) exp(-sum_i sigma_i^2 q_i^2); the second term is the lobe.
    """
    w_a, xi = cloud(w_f)
    s_t, s_z = w_a / math.sqrt(2), xi * w_a / math.sqrt(2)
    k = 2 * math.pi / wavelength

    def lobe(theta):
        qt = k * math.sin(theta)
        qz = k * (1 - math.cos(theta))
        return 2 * math.pi * math.sin(theta) * math.exp(-(s_t * qt) ** 2 - (s_z * qz) ** 2)

    edge = min(math.pi, 12 / (k * s_t))
    L, _ = integrate.quad(lobe, 0, edge, limit=400, epsabs=0, epsrel=1e-12)
    c_eff = (N - 1) * L / (4 * math.pi)
    return c_eff / (1 + c_eff)


def emission_only_fidelity(pa, pc):
    """Closed form for psi2 after transfer with only the emission branch lossy."""
    pa, pc = mp.mpf(pa), mp.mpf(pc)
    pb = 1 - pa
    return float((pa + mp.sqrt(pc) * pb) ** 2 + (1 - pc) * pa * pb)


def main():
    out = {}

    # geometry
    w3, x3 = cloud(3.0)
    w6, x6 = cloud(8.0)
    out["geometry"] = {
        "fig3_w_a": w3, "fig3_xi": x3, "fig6_w_a": w6, "fig6_xi": x6,
        "fig3_N_quadrature": atoms_by_quadrature(3.0, 2e14),
        "fig6_N_quadrature": atoms_by_quadrature(8.0, 5e14),
        "fig3_cone_over_4pi_figure": cone_fraction_over_4pi(w3, prefactor=1 / (2 * math.pi)),
        "fig6_cone_over_4pi_figure": cone_fraction_over_4pi(w6, prefactor=1 / (2 * math.pi)),
        "absorption_loss_N500_w2": float(mp.exp(-500 * 3 * mp.mpf(0.78) ** 2
                                               / (2 * mp.pi) / (mp.pi * 4))),
    }
    N3 = out["geometry"]["fig3_N_quadrature"]
    N6 = out["geometry"]["fig6_N_quadrature"]
    C3_fig = N3 * out["geometry"]["fig3_cone_over_4pi_figure"]
    C6_fig = N6 * out["geometry"]["fig6_cone_over_4pi_figure"]
    out["geometry"]["fig3_C_figure"] = C3_fig
    out["geometry"]["fig6_one_minus_pc_figure"] = 1 / (1 + C6_fig)

    # readout
    eta, od = 0.6, 0.042
    q1 = eta * od / (2 * TAU)
    qN = eta * (C3_fig / (1 + C3_fig)) / (2 * TAU + 33e-9)
    s100 = q1 * 100e-6
    err100, k100 = poisson_threshold_error(s100, 1e4 * 100e-6)
    grid1 = np.arange(20e-6, 60e-6, 0.01e-6)
    gridN = np.arange(1e-6, 5e-6, 0.001e-6)
    t1 = first_time_below(q1, 1e4, 1e-4, grid1)
    tN = first_time_below(qN, 1e4, 1e-4, gridN)
    out["readout"] = {
        "q1_rate": q1, "qN_rate_fig3_figure": qN, "rate_ratio_figure": qN / q1,
        "signal_100us": s100, "error_100us": err100, "threshold_100us": k100,
        "t_single_1e-4": t1, "t_collective_1e-4": tN, "time_ratio": t1 / tN,
        "threshold_cases": [[s, b, *poisson_threshold_error(s, b)]
                            for s, b in ((5.0, 0.5), (12.0, 2.0), (30.0, 0.1), (80.0, 10.0))],
    }

    # dynamics
    rows = []
    for g in (1.0, 5.0, 20.0, 30.0, 50.0, 100.0):
        pr, pt = transfer_closed_form(g)
        pr_i, pt_i, om30 = transfer_by_solve_ivp(g)
        rows.append({"delta_over_gamma": g, "p_remain": pr, "p_transfer": pt,
                     "p_remain_ivp": pr_i, "p_transfer_ivp": pt_i, "omega_30": om30})
    out["dynamics"] = {"rows": rows}

    # emission
    out["emission"] = {
        "fig3_expected_lobe_fraction": {str(n): expected_lobe_fraction(3.0, n)
                                        for n in (100, 500, 1000, 2000)},
    }

    # protocol
    pc6 = 1 - out["geometry"]["fig6_one_minus_pc_figure"]
    t2 = 1 / (2 * math.pi * 6.8346826e9 * 30e-24 * 2e14)
    out["protocol"] = {
        "t2_2e14": t2,
        "t2_5e14": 1 / (2 * math.pi * 6.8346826e9 * 30e-24 * 5e14),
        "coherence_10us_at_4ms": math.exp(-10e-6 / 4e-3),
        "fig6_emission_only_infidelity": 1 - emission_only_fidelity(0.5, pc6),
        "emission_only_infidelity_pc099": 1 - emission_only_fidelity(0.5, 0.99),
        "coherence_pc099": math.sqrt(0.99) / 2,
    }

    OUT.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
