"""Single-photon absorption by a collective qubit.

The receiver amplitudes obey the adiabatically-eliminated two-level equations

    dc_a/dt = -i sqrt(N) Omega_R(t) / (2 (1 + i gamma / 2 Delta)) c_b
    dc_b/dt = -i sqrt(N) Omega_R*(t) / (2 (1 + i gamma / 2 Delta)) c_a

with ``Omega_R = Omega_3 Omega_4* / (2 Delta)``. The dressing field ``Omega_3`` is
gated on for a window of length ``t_R`` and the photon envelope is
``Omega_4(t) = Omega_40 exp(-gamma (t - t_4) / 2)`` for ``t >= t_4``.

The complex coupling factor multiplies a symmetric coupling, so one normal
mode decays while the other grows. After a pi pulse ``|c_a|^2 + |c_b|^2``
exceeds 1 by about ``pi^2 gamma^2 / (8 Delta^2)``, which ``TransferResult``
exposes as a negative ``norm_deficit``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import kernels
from .errors import NumericalError

TAU_RB = 27e-9
GAMMA_RB = 1.0 / TAU_RB
OMEGA_40_DEFAULT = 2 * math.pi * 0.9e6


@dataclass(frozen=True)
class PulseConfig:
    """Absorption pulse parameters (angular frequencies in rad/s, times in s).

    ``window_start`` defaults to ``t_4`` (dressing field gated on at the known
    photon arrival). ``envelope="flat"`` holds ``Omega_4`` at ``Omega_40`` over
    the window, which gives a constant ``Omega_R`` for analytic checks.
    ``hermitian=True`` keeps only the real part of ``1/(1 + i gamma/2 Delta)``.
    """

    gamma: float = GAMMA_RB
    delta: float = 20 * GAMMA_RB
    omega_40: float = OMEGA_40_DEFAULT
    omega_30: complex = 0.0
    t_4: float = 0.0
    t_R: float | None = None
    N: float = 1000
    window_start: float | None = None
    envelope: str = "exponential"
    hermitian: bool = False

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.t_R is None:
            object.__setattr__(self, "t_R", 20.0 / self.gamma)
        if not self.t_R > 0:
            raise ValueError("t_R must be positive")
        if self.window_start is None:
            object.__setattr__(self, "window_start", self.t_4)
        if not self.N >= 1:
            raise ValueError("N must be >= 1")
        if self.delta == 0:
            raise ValueError("delta must be nonzero (Omega_R diverges at zero detuning)")
        if self.envelope not in ("exponential", "flat"):
            raise ValueError(f"unknown envelope {self.envelope!r}")

    @classmethod
    def operating_point(cls, delta_over_gamma: float = 20.0, **kw) -> "PulseConfig":
        gamma = kw.pop("gamma", GAMMA_RB)
        return normalize_pi_pulse(cls(gamma=gamma, delta=delta_over_gamma * gamma, **kw))

    @property
    def window_end(self) -> float:
        return self.window_start + self.t_R

    @property
    def coupling_factor(self) -> complex:
        """``1 / (1 + i gamma / 2 Delta)``, or its real part in the Hermitian limit."""
        f = 1.0 / (1.0 + 1j * self.gamma / (2.0 * self.delta))
        return complex(f.real) if self.hermitian else f


@dataclass(frozen=True)
class TransferResult:
    c_abar_final: complex
    c_bbar_final: complex
    n_steps: int = 0
    n_rejected: int = 0
    max_norm_increase: float = 0.0

    @property
    def p_remain(self) -> float:
        return abs(self.c_abar_final) ** 2

    @property
    def p_transfer(self) -> float:
        return abs(self.c_bbar_final) ** 2

    @property
    def transfer_failure(self) -> float:
        return 1.0 - self.p_transfer

    @property
    def norm_deficit(self) -> float:
        return 1.0 - self.p_remain - self.p_transfer


def photon_envelope(cfg: PulseConfig, t):
    t = np.asarray(t, dtype=float)
    if cfg.envelope == "flat":
        env = np.full_like(t, cfg.omega_40)
    else:
        env = cfg.omega_40 * np.exp(-0.5 * cfg.gamma * (t - cfg.t_4))
    return np.where(t >= cfg.t_4, env, 0.0)


def dressing_field(cfg: PulseConfig, t):
    t = np.asarray(t, dtype=float)
    on = (t >= cfg.window_start) & (t <= cfg.window_end)
    return np.where(on, cfg.omega_30, 0.0 + 0.0j)


def effective_rabi(cfg: PulseConfig, t):
    """``Omega_3(t) Omega_4*(t) / (2 Delta)`` (complex, rad/s)."""
    val = dressing_field(cfg, t) * np.conj(photon_envelope(cfg, t)) / (2.0 * cfg.delta)
    return complex(val) if np.ndim(val) == 0 else val


def _overlap(cfg: PulseConfig) -> tuple[float, float]:
    return max(cfg.t_4, cfg.window_start), cfg.window_end


def envelope_area(cfg: PulseConfig) -> float:
    """``integral Omega_4(t) dt`` over the part of the window after ``t_4``."""
    a, b = _overlap(cfg)
    if b <= a:
        return 0.0
    if cfg.envelope == "flat":
        return cfg.omega_40 * (b - a)
    g = cfg.gamma
    return cfg.omega_40 * (2.0 / g) * (math.exp(-0.5 * g * (a - cfg.t_4))
                                       - math.exp(-0.5 * g * (b - cfg.t_4)))


def normalize_pi_pulse(cfg: PulseConfig) -> PulseConfig:
    """Return ``cfg`` with ``omega_30`` solved so that sqrt(N) * int Omega_R dt = pi.

    The phase of an existing complex ``omega_30`` is kept.
    """
    if cfg.omega_40 == 0:
        raise ValueError("cannot normalize a pulse with omega_40 = 0")
    area = envelope_area(cfg)
    if area == 0:
        raise ValueError("photon envelope does not overlap the dressing window")
    magnitude = math.pi * 2.0 * cfg.delta / (math.sqrt(cfg.N) * area)
    phase = 1.0 if cfg.omega_30 == 0 else cfg.omega_30 / abs(cfg.omega_30)
    omega_30 = magnitude * phase
    if isinstance(omega_30, complex) and omega_30.imag == 0:
        omega_30 = omega_30.real
    return replace(cfg, omega_30=omega_30)


def pulse_area(cfg: PulseConfig) -> complex:
    """``sqrt(N) * int Omega_R dt`` from the closed-form envelope integral."""
    return math.sqrt(cfg.N) * cfg.omega_30 * envelope_area(cfg) / (2.0 * cfg.delta)


def integrate_transfer(cfg: PulseConfig, t_end: float | None = None, tol: float = 1e-10,
                       max_steps: int = 1_000_000) -> TransferResult:
    """Integrate from ``c_a = 1, c_b = 0`` with adaptive Dormand-Prince 5(4) steps.

    Amplitudes are frozen outside the window, so only the interval where both
    fields are on is stepped.
    """
    if t_end is None:
        t_end = cfg.window_end
    a, b = _overlap(cfg)
    b = min(b, t_end)
    coef = math.sqrt(cfg.N) * cfg.coupling_factor / 2.0
    if cfg.omega_40 == 0 or cfg.omega_30 == 0 or b <= a:
        return TransferResult(1.0 + 0.0j, 0.0 + 0.0j)
    ca, cb, t, n_acc, n_rej, status, rise = kernels.dopri5_transfer(
        float(a), float(b), 1.0 + 0.0j, 0.0 + 0.0j, complex(coef), complex(cfg.omega_30),
        float(cfg.omega_40), float(cfg.gamma), float(cfg.delta), float(cfg.t_4),
        float(cfg.window_start), float(cfg.t_R), cfg.envelope == "flat",
        float(tol), float(tol), 0.0, int(max_steps),
    )
    if status == kernels.STATUS_STEP_UNDERFLOW:
        raise NumericalError(f"step size underflow at t = {t!r} s")
    if status == kernels.STATUS_MAX_STEPS:
        raise NumericalError(f"exceeded {max_steps} steps; stopped at t = {t!r} s")
    return TransferResult(complex(ca), complex(cb), int(n_acc), int(n_rej), float(rise))


def excited_populations(cfg: PulseConfig) -> tuple[float, float]:
    """Adiabaticity estimates ``(|Omega_30/Delta|^2, |Omega_40/Delta|^2)``."""
    return abs(cfg.omega_30 / cfg.delta) ** 2, abs(cfg.omega_40 / cfg.delta) ** 2


def jittered_arrival(cfg: PulseConfig, rng: np.random.Generator, mean_delay: float) -> PulseConfig:
    """Photon arrives an exponentially distributed delay after the window opens.

    For sensitivity studies only; the dressing window stays where it was.
    """
    return replace(cfg, window_start=cfg.window_start,
                   t_4=cfg.window_start + rng.exponential(mean_delay))


@dataclass(frozen=True)
class Fig4Row:
    delta_over_gamma: float
    p_remain: float
    transfer_failure: float
    norm_deficit: float


FIG4_COLUMNS = ("delta_over_gamma", "p_remain", "transfer_failure", "norm_deficit")


def fig4_sweep(base: PulseConfig, delta_over_gamma_grid: Sequence[float], tol: float = 1e-10
               ) -> list[Fig4Row]:
    grid = [float(g) for g in delta_over_gamma_grid]
    if any(g <= 0 for g in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("delta/gamma grid must be positive and strictly ascending")
    rows = []
    for g in grid:
        cfg = normalize_pi_pulse(replace(base, delta=g * base.gamma))
        res = integrate_transfer(cfg, tol=tol)
        rows.append(Fig4Row(g, res.p_remain, res.transfer_failure, res.norm_deficit))
    return rows


def delta_grid(lo: float = 1.0, hi: float = 100.0, n_points: int = 40) -> list[float]:
    return list(np.geomspace(lo, hi, n_points))
