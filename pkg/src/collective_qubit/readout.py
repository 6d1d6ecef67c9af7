"""Fluorescence count models and Poisson threshold discrimination."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .errors import NumericalError, UnattainableError
from .geometry import TrapConfig, derive_geometry, per_cm3


@dataclass(frozen=True)
class DetectionConfig:
    eta: float = 0.6
    omega_d_frac: float = 0.042
    tau: float = 27e-9
    background_rate: float = 1e4
    t1: float = 33e-9

    def __post_init__(self):
        for name in ("eta", "omega_d_frac", "tau", "background_rate", "t1"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.eta > 1 or self.omega_d_frac > 1:
            raise ValueError("eta and omega_d_frac must not exceed 1")


@dataclass(frozen=True)
class CountPrediction:
    mean_signal: float
    mean_background: float
    duration: float

    @property
    def signal_rate(self) -> float:
        return self.mean_signal / self.duration if self.duration > 0 else math.nan


def single_atom_rate(det: DetectionConfig) -> float:
    return det.eta * det.omega_d_frac / (2.0 * det.tau)


def collective_rate(det: DetectionConfig, C: float) -> float:
    if C < 0:
        raise ValueError("cooperativity must be non-negative")
    if math.isinf(C):
        pc = 1.0
    else:
        pc = C / (1.0 + C)
    return det.eta * pc / (2.0 * det.tau + det.t1)


def q1_counts(det: DetectionConfig, t: float) -> CountPrediction:
    if t < 0:
        raise ValueError("t must be non-negative")
    return CountPrediction(single_atom_rate(det) * t, det.background_rate * t, t)


def qN_counts(det: DetectionConfig, C: float, t: float) -> CountPrediction:
    if t < 0:
        raise ValueError("t must be non-negative")
    return CountPrediction(collective_rate(det, C) * t, det.background_rate * t, t)


# ---------------------------------------------------------------------------
# Poisson threshold discrimination

def _poisson_pmf(mu: float, kmax: int) -> np.ndarray:
    """pmf[0..kmax], built outward from the mode so nothing underflows early."""
    pmf = np.zeros(kmax + 1)
    if mu == 0:
        pmf[0] = 1.0
        return pmf
    mode = min(int(mu), kmax)
    pmf[mode] = math.exp(mode * math.log(mu) - mu - math.lgamma(mode + 1))
    for k in range(mode + 1, kmax + 1):
        pmf[k] = pmf[k - 1] * mu / k
    for k in range(mode - 1, -1, -1):
        pmf[k] = pmf[k + 1] * (k + 1) / mu
    return pmf


def poisson_below(mu: float, kmax: int) -> np.ndarray:
    """``P(X < k)`` for k = 0..kmax."""
    pmf = _poisson_pmf(mu, kmax)
    out = np.empty(kmax + 1)
    out[0] = 0.0
    out[1:] = np.cumsum(pmf[:-1])
    return out


def poisson_at_least(mu: float, kmax: int) -> np.ndarray:
    """``P(X >= k)`` for k = 0..kmax, summed from the far tail inward."""
    tail_end = kmax + int(12 * math.sqrt(mu + 1)) + 40
    pmf = _poisson_pmf(mu, tail_end)
    return np.cumsum(pmf[::-1])[::-1][:kmax + 1]


class ThresholdResult(NamedTuple):
    error: float
    best_threshold: int


def threshold_error(mean_signal: float, mean_background: float,
                    prior_bright: float = 0.5) -> ThresholdResult:
    """Minimum discrimination error over integer count thresholds.

    The bright hypothesis has mean ``mean_signal + mean_background`` counts and
    the dark one ``mean_background``. "Bright" is declared when at least ``k``
    counts arrive; the error for each ``k >= 1`` is the prior-weighted sum of
    the false-dark and false-bright probabilities. Ties resolve to the
    smallest ``k``.
    """
    if not mean_signal > mean_background or mean_background < 0:
        raise ValueError(
            "threshold discrimination needs mean_signal > mean_background >= 0 "
            f"(got {mean_signal!r}, {mean_background!r})"
        )
    bright = mean_signal + mean_background
    kmax = int(math.ceil(bright + 12 * math.sqrt(bright) + 30))
    miss = poisson_below(bright, kmax)[1:]
    false_alarm = poisson_at_least(mean_background, kmax)[1:]
    err = prior_bright * miss + (1.0 - prior_bright) * false_alarm
    i = int(np.argmin(err))
    return ThresholdResult(float(err[i]), i + 1)


def _error_at(det: DetectionConfig, C: float | None, t: float) -> float:
    counts = q1_counts(det, t) if C is None else qN_counts(det, C, t)
    return threshold_error(counts.mean_signal, counts.mean_background).error


def measurement_time_for_error(det: DetectionConfig, target_error: float,
                               C: float | None = None, t_max: float = 1.0,
                               rel_tol: float = 0.01) -> float:
    """Shortest integration time reaching ``target_error``.

    ``C=None`` selects the single-atom count model, otherwise the collective
    model with cooperativity ``C``. Geometric bracketing from 1 ns, then
    bisection to ``rel_tol``.
    """
    if not 0 < target_error < 0.5:
        raise ValueError("target_error must lie in (0, 0.5)")
    rate = single_atom_rate(det) if C is None else collective_rate(det, C)
    if rate <= det.background_rate:
        raise UnattainableError("signal rate does not exceed the background rate")
    lo = 1e-9
    e_lo = _error_at(det, C, lo)
    if e_lo <= target_error:
        return lo
    hi = lo
    while True:
        hi = min(hi * 1.5, t_max)
        e_hi = _error_at(det, C, hi)
        if e_hi <= target_error:
            break
        if hi >= t_max:
            raise UnattainableError(
                f"error {e_hi:.3g} at t = {t_max} s still above target {target_error}"
            )
        lo, e_lo = hi, e_hi
    if e_hi > e_lo:
        raise NumericalError(f"error not monotone in t on bracket [{lo}, {hi}]")
    while (hi - lo) > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if _error_at(det, C, mid) <= target_error:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# density sweep

@dataclass(frozen=True)
class Fig3Row:
    n0_cm3: float
    q1_rate_hz: float
    qN_rate_hz: float
    N: float


FIG3_COLUMNS = ("n0_cm3", "q1_rate_hz", "qN_rate_hz", "N")


def fig3_sweep(trap: TrapConfig, det: DetectionConfig, densities_cm3: Sequence[float]
               ) -> list[Fig3Row]:
    """Single-atom and collective detected count rates versus peak density."""
    densities_cm3 = [float(n) for n in densities_cm3]
    if any(n <= 0 for n in densities_cm3):
        raise ValueError("densities must be positive")
    if any(b <= a for a, b in zip(densities_cm3, densities_cm3[1:])):
        raise ValueError("densities must be strictly ascending")
    q1 = single_atom_rate(det)
    rows = []
    for n in densities_cm3:
        geo = derive_geometry(replace(trap, n0=per_cm3(n)))
        rows.append(Fig3Row(n, q1, collective_rate(det, geo.C), geo.N))
    return rows


def density_grid(n_min_cm3: float, n_max_cm3: float, n_points: int, log: bool = False):
    if not 0 < n_min_cm3 < n_max_cm3 or n_points < 2:
        raise ValueError("need 0 < n_min < n_max and at least two points")
    if log:
        return list(np.geomspace(n_min_cm3, n_max_cm3, n_points))
    return list(np.linspace(n_min_cm3, n_max_cm3, n_points))


__all__ = [
    "DetectionConfig", "CountPrediction", "ThresholdResult", "Fig3Row", "FIG3_COLUMNS",
    "single_atom_rate", "collective_rate", "q1_counts", "qN_counts", "threshold_error",
    "poisson_below", "poisson_at_least", "measurement_time_for_error", "fig3_sweep",
    "density_grid",
]
