"""Brute-force far-field check of phase-matched directed emission.

Atoms are drawn from the Gaussian cloud, each carries the phase
``exp(i k4 . r_j)`` imprinted by the excitation, and the (isotropic-emitter)
far-field intensity in direction ``k_hat`` is

    I(k_hat) = |sum_j exp(i (k4 - k k_hat) . r_j)|^2 / N.

Its sphere integral is known exactly from the pair sum
``(4 pi / N) sum_{j,l} cos(k4 . r_jl) sinc(k r_jl)``, which serves as the
normalization. Angular integrals use Gauss-Legendre nodes in ``cos(theta)``
about ``k4`` and a uniform azimuthal grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import QuadratureError
from .geometry import (TrapConfig, aspect_ratio, cloud_radius, cooperativity,
                       directed_emission_probability)

WEIGHTINGS = ("cone", "gaussian", "lobe")
MAX_NODES = 1024
ORACLE_SEEDS = 8
VALID_C = (0.5, 30.0)
MAX_ORACLE_N = 5000


@dataclass(frozen=True, eq=False)
class AtomCloudSample:
    positions: np.ndarray  # (N, 3), um
    seed: int | None = None

    @property
    def N(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class WaveVectors:
    k_magnitude: float
    k4_direction: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        d = np.asarray(self.k4_direction, dtype=float)
        n = np.linalg.norm(d)
        if n == 0:
            raise ValueError("k4 direction must be nonzero")
        object.__setattr__(self, "k4_direction", tuple(d / n))

    @classmethod
    def for_wavelength(cls, wavelength: float, direction=(0.0, 0.0, 1.0)) -> "WaveVectors":
        return cls(2.0 * math.pi / wavelength, tuple(direction))

    @property
    def k4(self) -> np.ndarray:
        return self.k_magnitude * np.asarray(self.k4_direction)


@dataclass(frozen=True, eq=False)
class EmissionPattern:
    """Intensity on a sphere grid; ``theta`` is measured from ``k4``."""

    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray  # solid-angle weights, same shape as intensity
    intensity: np.ndarray  # normalized so sum(weights * intensity) == 1
    residual: float = 0.0  # relative mismatch of the raw quadrature vs. the exact total

    def integral(self) -> float:
        return float(np.sum(self.weights * self.intensity))


def sample_positions(trap: TrapConfig, N: int, seed: int | None = None) -> AtomCloudSample:
    """Draw ``N`` positions from ``n(r) ~ exp(-(rho^2 + z^2/xi^2)/w_a^2)``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    w_a = cloud_radius(trap)
    xi = aspect_ratio(trap)
    sigma = np.array([w_a, w_a, xi * w_a]) / math.sqrt(2.0)
    rng = np.random.default_rng(seed)
    return AtomCloudSample(rng.standard_normal((N, 3)) * sigma, seed)


# ---------------------------------------------------------------------------
# quadrature helpers

def _frame(direction) -> np.ndarray:
    """Orthonormal (e1, e2, e3) with e3 along ``direction``."""
    e3 = np.asarray(direction, dtype=float)
    trial = np.array([1.0, 0.0, 0.0]) if abs(e3[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = trial - e3 * (trial @ e3)
    e1 /= np.linalg.norm(e1)
    return np.stack([e1, np.cross(e3, e1), e3])


def _grid(mu_lo: float, n_theta: int, n_phi: int):
    x, w = np.polynomial.legendre.leggauss(n_theta)
    mu = 0.5 * (1.0 - mu_lo) * x + 0.5 * (1.0 + mu_lo)
    wmu = 0.5 * (1.0 - mu_lo) * w
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    MU, PHI = np.meshgrid(mu, phi, indexing="ij")
    W = np.outer(wmu, np.full(n_phi, 2.0 * math.pi / n_phi))
    return MU, PHI, W


def _intensity_on(sample: AtomCloudSample, kv: WaveVectors, MU, PHI) -> np.ndarray:
    frame = _frame(kv.k4_direction)
    st = np.sqrt(np.clip(1.0 - MU ** 2, 0.0, None))
    local = np.stack([st * np.cos(PHI), st * np.sin(PHI), MU], axis=-1).reshape(-1, 3)
    khat = local @ frame
    q = kv.k4[None, :] - kv.k_magnitude * khat
    pos = np.ascontiguousarray(sample.positions, dtype=float)
    return kernels.far_field_intensity(pos, np.ascontiguousarray(q)).reshape(MU.shape)


def total_power(sample: AtomCloudSample, kv: WaveVectors) -> float:
    """Exact sphere integral of the unnormalized intensity."""
    pos = np.ascontiguousarray(sample.positions, dtype=float)
    return float(kernels.pair_power(pos, np.ascontiguousarray(kv.k4), float(kv.k_magnitude)))


def _start_nodes(sample: AtomCloudSample, kv: WaveVectors) -> int:
    # max(64, 4 k w_a xi): w_a xi is sqrt(2) times the rms extent along k4
    along = sample.positions @ np.asarray(kv.k4_direction)
    extent = math.sqrt(2.0) * float(np.sqrt(np.mean(along ** 2))) if sample.N > 1 else 0.0
    return max(64, int(math.ceil(4.0 * kv.k_magnitude * extent)))


def transverse_rms(sample: AtomCloudSample, kv: WaveVectors) -> float:
    along = sample.positions @ np.asarray(kv.k4_direction)
    perp2 = np.sum(sample.positions ** 2, axis=1) - along ** 2
    return float(np.sqrt(np.mean(perp2) / 2.0))


def lobe_half_angle(sample: AtomCloudSample, kv: WaveVectors, width: float = 4.0) -> float:
    """Half-angle enclosing the phase-matched lobe out to ``exp(-width^2)``."""
    s = transverse_rms(sample, kv)
    if s == 0:
        return math.pi
    x = width / (kv.k_magnitude * s)
    return math.asin(x) if x < 1 else math.pi


def sphere_pattern(sample: AtomCloudSample, kv: WaveVectors, tol: float = 1e-6,
                   n_start: int | None = None, max_nodes: int = MAX_NODES) -> EmissionPattern:
    """Full-sphere pattern, refined until its integral matches the exact total."""
    exact = total_power(sample, kv)
    n = n_start or _start_nodes(sample, kv)
    while True:
        MU, PHI, W = _grid(-1.0, n, n)
        I = _intensity_on(sample, kv, MU, PHI)
        raw = float(np.sum(W * I))
        residual = abs(raw - exact) / exact
        if residual <= tol:
            break
        if 2 * n > max_nodes:
            raise QuadratureError(
                f"sphere quadrature did not reach {tol:g} (residual {residual:.3e} at {n} nodes)",
                residual,
            )
        n *= 2
    return EmissionPattern(np.arccos(MU), PHI, W, I / raw, residual)


def cone_integral(sample: AtomCloudSample, kv: WaveVectors, half_angle: float,
                  weighting: str = "cone", gauss_width: float | None = None,
                  tol: float = 1e-6, max_nodes: int = MAX_NODES,
                  scale: float | None = None) -> float:
    """Integrate the unnormalized intensity over a cone about ``k4``.

    ``weighting``:
      ``cone``      hard cone, plain intensity;
      ``gaussian``  intensity times ``exp(-theta^2 / gauss_width^2)``;
      ``lobe``      intensity minus the incoherent floor of 1 (the
                    single-atom diagonal terms), leaving the interference lobe.

    Refinement stops when successive node doublings agree to ``tol`` relative
    to ``scale`` (default: the integral itself).
    """
    if weighting not in WEIGHTINGS:
        raise ValueError(f"unknown weighting {weighting!r}")
    mu_lo = math.cos(half_angle)
    n = 32
    prev = None
    while True:
        MU, PHI, W = _grid(mu_lo, n, n)
        I = _intensity_on(sample, kv, MU, PHI)
        if weighting == "lobe":
            I = I - 1.0
        elif weighting == "gaussian":
            I = I * np.exp(-np.arccos(MU) ** 2 / gauss_width ** 2)
        val = float(np.sum(W * I))
        ref = max(abs(val) if scale is None else scale, 1e-300)
        if prev is not None and abs(val - prev) <= tol * ref:
            return val
        if 2 * n > max_nodes:
            raise QuadratureError(
                f"cone quadrature did not converge to {tol:g} at {n} nodes",
                abs(val - prev) / ref,
            )
        prev = val
        n *= 2


def cone_half_angle(solid_angle: float) -> float:
    if not 0 < solid_angle < 4 * math.pi:
        raise ValueError("cone solid angle must lie in (0, 4 pi)")
    return math.acos(1.0 - solid_angle / (2.0 * math.pi))


def coherent_fraction(sample: AtomCloudSample, kv: WaveVectors, cone_solid_angle: float,
                      weighting: str = "cone", tol: float = 1e-6) -> float:
    """Fraction of the emitted power selected by ``weighting`` (see :func:`cone_integral`).

    For ``cone`` and ``gaussian`` the cone has solid angle ``cone_solid_angle``
    (for ``gaussian`` it sets the 1/e angle). For ``lobe`` the capture cone
    is widened to :func:`lobe_half_angle` if that is larger, so the whole
    interference lobe is counted.
    """
    half = cone_half_angle(cone_solid_angle)
    gauss_width = None
    if weighting == "gaussian":
        gauss_width = half
        half = min(math.pi, 5.0 * half)
    elif weighting == "lobe":
        half = max(half, lobe_half_angle(sample, kv))
    if half >= math.pi:
        half = math.pi
    total = total_power(sample, kv)
    return cone_integral(sample, kv, half, weighting, gauss_width, tol, scale=total) / total


def far_field_fraction(sample: AtomCloudSample, kv: WaveVectors, cone_solid_angle: float,
                       weighting: str = "cone", tol: float = 1e-6,
                       max_nodes: int = MAX_NODES) -> tuple[float, EmissionPattern]:
    """Coherent fraction plus the full normalized sphere pattern."""
    frac = coherent_fraction(sample, kv, cone_solid_angle, weighting, tol)
    pattern = sphere_pattern(sample, kv, tol=tol, max_nodes=max_nodes)
    return frac, pattern


# ---------------------------------------------------------------------------
# oracle sweep

@dataclass(frozen=True)
class OracleRow:
    N: int
    C: float
    pc_formula: float
    pc_oracle: float
    pc_oracle_stderr: float
    rel_error: float

    @property
    def in_validity(self) -> bool:
        return VALID_C[0] <= self.C <= VALID_C[1]


ORACLE_COLUMNS = ("N", "C", "pc_formula", "pc_oracle", "pc_oracle_stderr", "rel_error")


def oracle_vs_formula_sweep(trap: TrapConfig, N_list: Sequence[int], seed: int = 0,
                            n_seeds: int = ORACLE_SEEDS, weighting: str = "lobe",
                            tol: float = 1e-4) -> list[OracleRow]:
    """Compare the sampled phase-matched emission fraction with ``C/(1+C)``.

    Per row, ``n_seeds`` independent clouds are drawn with seeds derived from
    ``(seed, N, replica)``; the mean and standard error are reported.
    """
    N_list = [int(n) for n in N_list]
    if not N_list:
        raise ValueError("N_list is empty")
    if any(n < 1 or n > MAX_ORACLE_N for n in N_list):
        raise ValueError(f"every N must lie in [1, {MAX_ORACLE_N}]")
    w0 = math.sqrt(2.0) * cloud_radius(trap)
    kv = WaveVectors.for_wavelength(trap.wavelength)
    omega_c = trap.omega_c_prefactor * 2.0 * math.pi / (kv.k_magnitude * w0) ** 2
    rows = []
    for n in N_list:
        C = cooperativity(n, w0, trap.wavelength, trap.omega_c_prefactor)
        pc = directed_emission_probability(C)
        vals = []
        for rep in range(n_seeds):
            seq = np.random.SeedSequence([int(seed), n, rep])
            s = sample_positions(trap, n, int(seq.generate_state(1)[0]))
            vals.append(coherent_fraction(s, kv, omega_c, weighting, tol))
        vals = np.asarray(vals)
        mean = float(vals.mean())
        stderr = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
        rel = (mean - pc) / pc if pc > 0 else math.inf
        rows.append(OracleRow(n, C, pc, mean, stderr, rel))
    return rows
