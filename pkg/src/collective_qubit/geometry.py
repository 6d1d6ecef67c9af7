"""Cloud and optics quantities for atoms held in a single-beam dipole trap.

Units: lengths in micrometers, densities in atoms per cubic micrometer.
Use :func:`per_cm3` to convert the customary cm^-3 densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

#: Omega_c = 2 pi / (k w0)^2, as printed with the P_c formula.
EQUATION_CONVENTION = 1.0
#: Omega_c = 1 / (k w0)^2, the convention behind the quoted figure-caption values.
FIGURE_CONVENTION = 1.0 / (2.0 * math.pi)

CONVENTIONS = {"equation": EQUATION_CONVENTION, "figure": FIGURE_CONVENTION}

UM3_PER_CM3 = 1e12


def per_cm3(n_cm3: float) -> float:
    """Convert a density in cm^-3 to um^-3."""
    return n_cm3 / UM3_PER_CM3


def to_cm3(n_um3: float) -> float:
    return n_um3 * UM3_PER_CM3


@dataclass(frozen=True)
class TrapConfig:
    """Dipole-trap inputs.

    Parameters
    ----------
    w_f : float
        Trap beam waist (um).
    lambda_f : float
        Trap wavelength (um).
    T_rel : float
        Atom temperature over trap depth, strictly between 0 and 1.
    n0 : float
        Peak density (um^-3).
    wavelength : float
        Emission wavelength (um).
    omega_c_prefactor : float
        Geometric prefactor B in ``Omega_c = B * 2 pi / (k w0)^2``.
    """

    w_f: float = 3.0
    lambda_f: float = 1.06
    T_rel: float = 0.05
    n0: float = per_cm3(2e14)
    wavelength: float = 0.78
    omega_c_prefactor: float = EQUATION_CONVENTION

    def __post_init__(self):
        for name in ("w_f", "lambda_f", "wavelength", "omega_c_prefactor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not 0 < self.T_rel < 1:
            raise ValueError(f"T_rel must lie in (0, 1), got {self.T_rel!r}")
        if not self.n0 >= 0:
            raise ValueError(f"n0 must be non-negative, got {self.n0!r}")

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.wavelength

    def with_convention(self, name: str) -> "TrapConfig":
        return replace(self, omega_c_prefactor=CONVENTIONS[name])

    def with_density_cm3(self, n_cm3: float) -> "TrapConfig":
        return replace(self, n0=per_cm3(n_cm3))


FIG3_TRAP = TrapConfig()
FIG6_TRAP = TrapConfig(w_f=8.0, n0=per_cm3(5e14))


@dataclass(frozen=True)
class DerivedGeometry:
    w_a: float
    xi: float
    N: float
    w0: float
    Omega_c: float
    C: float
    P_c: float

    @property
    def N_rounded(self) -> int:
        return int(round(self.N))

    @property
    def P_i(self) -> float:
        """Probability of emission outside the phase-matched mode."""
        return 1.0 - self.P_c

    def as_dict(self) -> dict:
        return {"w_a_um": self.w_a, "xi": self.xi, "N": self.N, "w0_um": self.w0,
                "Omega_c_sr": self.Omega_c, "Omega_c_over_4pi": self.Omega_c / (4 * math.pi),
                "C": self.C, "P_c": self.P_c}


def cloud_radius(cfg: TrapConfig) -> float:
    return math.sqrt(1.5 * cfg.T_rel) * cfg.w_f


def aspect_ratio(cfg: TrapConfig) -> float:
    return math.pi * cfg.w_f / cfg.lambda_f


def atom_number(cfg: TrapConfig) -> float:
    return cfg.n0 * (1.5 * math.pi * cfg.T_rel) ** 1.5 * aspect_ratio(cfg) * cfg.w_f ** 3


def coherent_solid_angle(w0: float, wavelength: float, prefactor: float = EQUATION_CONVENTION) -> float:
    k = 2.0 * math.pi / wavelength
    return prefactor * 2.0 * math.pi / (k * w0) ** 2


def cooperativity(N: float, w0: float, wavelength: float,
                  prefactor: float = EQUATION_CONVENTION) -> float:
    """``N Omega_c / 4 pi``; equals ``N / (2 k^2 w0^2)`` for the equation convention."""
    if N < 0:
        raise ValueError("atom number must be non-negative")
    return N * coherent_solid_angle(w0, wavelength, prefactor) / (4.0 * math.pi)


def directed_emission_probability(C: float) -> float:
    return C / (1.0 + C)


def derive_geometry(cfg: TrapConfig) -> DerivedGeometry:
    w_a = cloud_radius(cfg)
    xi = aspect_ratio(cfg)
    N = atom_number(cfg)
    w0 = math.sqrt(2.0) * w_a
    omega_c = coherent_solid_angle(w0, cfg.wavelength, cfg.omega_c_prefactor)
    C = N * omega_c / (4.0 * math.pi)
    return DerivedGeometry(w_a=w_a, xi=xi, N=N, w0=w0, Omega_c=omega_c, C=C,
                           P_c=directed_emission_probability(C))


def optical_depth(N: float, w0: float, wavelength: float) -> float:
    """``N sigma / A`` with ``sigma = 3 lambda^2 / 2 pi`` and ``A = pi w0^2``."""
    sigma = 3.0 * wavelength ** 2 / (2.0 * math.pi)
    return N * sigma / (math.pi * w0 ** 2)


def absorption_probability(N: float, w0: float, wavelength: float) -> float:
    if N < 0 or not w0 > 0 or not wavelength > 0:
        raise ValueError("absorption_probability needs N >= 0 and positive w0, wavelength")
    return -math.expm1(-optical_depth(N, w0, wavelength))


def absorption_loss(N: float, w0: float, wavelength: float) -> float:
    """``1 - P_1`` without cancellation."""
    return math.exp(-optical_depth(N, w0, wavelength))


def density_profile(cfg: TrapConfig, rho, z):
    """Peak-normalized Gaussian cloud density at cylindrical ``(rho, z)`` (um^-3)."""
    w_a = cloud_radius(cfg)
    xi = aspect_ratio(cfg)
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    val = cfg.n0 * np.exp(-(rho ** 2 + (z / xi) ** 2) / w_a ** 2)
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class Fig6Row:
    n0_cm3: float
    one_minus_pc: float
    N: float


FIG6_COLUMNS = ("n0_cm3", "one_minus_pc", "N")


def fig6_sweep(trap: TrapConfig, densities_cm3) -> list[Fig6Row]:
    """Probability of emission outside the phase-matched mode versus peak density."""
    densities_cm3 = [float(n) for n in densities_cm3]
    if any(n <= 0 for n in densities_cm3) or any(b <= a for a, b in zip(densities_cm3, densities_cm3[1:])):
        raise ValueError("densities must be positive and strictly ascending")
    rows = []
    for n in densities_cm3:
        geo = derive_geometry(trap.with_density_cm3(n))
        rows.append(Fig6Row(n, 1.0 / (1.0 + geo.C), geo.N))
    return rows
