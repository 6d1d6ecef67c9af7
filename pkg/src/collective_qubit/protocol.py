"""Density-operator simulation of qubit transfer through a single photon.

Register layout (all two-level, basis index 0 / 1):

=========  ===============  ================
factor     0                1
=========  ===============  ================
psi1       |a>              |b>
phi1       |a_bar>          |b_bar>
photon     vacuum           one photon
phi2       |a_bar>          |b_bar>
psi2       |a>              |b>
=========  ===============  ================

Sequence: CNOT psi1->phi1, CNOT phi1->psi1 (disentangle, optional), emission
phi1->photon, absorption photon->phi2, CNOT phi2->psi2, CNOT psi2->phi2. The
last gate returns phi2 to |a_bar> so that psi2 carries the qubit alone.
Ensembles dephase and lose excitations for the duration of every step.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .dynamics import PulseConfig, integrate_transfer, normalize_pi_pulse
from .geometry import TrapConfig, absorption_probability, derive_geometry, to_cm3
from .states import (DensityOperator, JointLayout, SingleQubitState, amplitude_damping,
                     apply_channel, apply_unitary, basis_ket, depolarizing, fidelity,
                     marginal, phase_damping, phase_flip, tensor)

LABELS = ("psi1", "phi1", "photon", "phi2", "psi2")
PSI1, PHI1, PHOTON, PHI2, PSI2 = range(5)
LAYOUT = JointLayout.of(*LABELS)

NU_HF = 6.8346826e9  # Rb-87 ground hyperfine splitting (Hz)
CLOCK_SHIFT_COEFF = 30e-24  # fractional shift per unit density (cm^3)
DDD_DEFAULT = 2 * math.pi * 25e6
EPSILON_GUARD = 0.1
DEFAULT_GATE_ERROR = 1e-4
DEFAULT_T_LOSS = 0.1
OCCUPANCY_ATOL = 1e-9

GATE_MODELS = ("depolarizing", "phase_flip")
SOURCES = ("emission_loss", "absorption_loss", "gate_error", "decoherence")

CNOT = np.array([[1, 0, 0, 0],
                 [0, 1, 0, 0],
                 [0, 0, 0, 1],
                 [0, 0, 1, 0]], dtype=complex)


@dataclass(frozen=True)
class GateSpec:
    """Blockade CNOT between a single atom and an ensemble.

    The error probability ``epsilon = N rabi^2 / ddd_avg^2`` is always
    recomputed from the inputs.
    """

    rabi: float = 0.0
    N: float = 1.0
    ddd_avg: float = DDD_DEFAULT
    model: str = "depolarizing"

    def __post_init__(self):
        if not self.ddd_avg > 0:
            raise ValueError("ddd_avg must be positive")
        if not self.N >= 1:
            raise ValueError("N must be >= 1")
        if self.model not in GATE_MODELS:
            raise ValueError(f"unknown gate error model {self.model!r}")
        if not self.epsilon < EPSILON_GUARD:
            raise ValueError(
                f"gate error {self.epsilon:.3g} is outside the perturbative regime (< {EPSILON_GUARD})"
            )

    @property
    def omega_eff(self) -> float:
        return math.sqrt(self.N) * self.rabi

    @property
    def epsilon(self) -> float:
        return self.omega_eff ** 2 / self.ddd_avg ** 2

    @classmethod
    def for_error(cls, epsilon: float, N: float = 1.0, ddd_avg: float = DDD_DEFAULT,
                  model: str = "depolarizing") -> "GateSpec":
        if epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        return cls(math.sqrt(epsilon / N) * ddd_avg, N, ddd_avg, model)

    def kraus(self) -> list[np.ndarray]:
        eps = self.epsilon
        return depolarizing(eps) if self.model == "depolarizing" else phase_flip(eps)


@dataclass(frozen=True)
class StepDurations:
    cnot: float = 33e-9
    emission: float = 2 * 27e-9
    absorption: float = 20 * 27e-9

    def __post_init__(self):
        for name in ("cnot", "emission", "absorption"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} duration must be non-negative")


@dataclass(frozen=True)
class ChannelSpec:
    """Photon channel and memory parameters; ``inf`` times switch decoherence off."""

    p_c: float = 1.0
    p_1: float = 1.0
    transfer_fidelity: float = 1.0
    t2_collective: float = math.inf
    t_loss: float = math.inf
    step_durations: StepDurations = field(default_factory=StepDurations)

    def __post_init__(self):
        for name in ("p_c", "p_1", "transfer_fidelity"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        for name in ("t2_collective", "t_loss"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def ideal(cls, step_durations: StepDurations | None = None) -> "ChannelSpec":
        return cls(step_durations=step_durations or StepDurations())

    @property
    def absorption_success(self) -> float:
        return self.p_1 * self.transfer_fidelity


def clock_shift_t2(n0_cm3: float, nu_hf: float = NU_HF, coeff: float = CLOCK_SHIFT_COEFF) -> float:
    """Collective dephasing time ``1 / (2 pi nu_hf coeff n0)`` (s)."""
    if not n0_cm3 > 0:
        raise ValueError("density must be positive")
    return 1.0 / (2.0 * math.pi * nu_hf * coeff * n0_cm3)


def coherence_factor(elapsed: float, t2: float) -> float:
    return math.exp(-elapsed / t2)


def channel_from_physics(trap: TrapConfig, pulse: PulseConfig | None = None,
                         t_loss: float = DEFAULT_T_LOSS, tau: float = 27e-9,
                         cnot_time: float = 33e-9) -> ChannelSpec:
    """Channel parameters for sender and receiver both built like ``trap``.

    ``transfer_fidelity`` is ``1 - |c_a_bar|^2`` after the absorption pulse,
    clipped to [0, 1].
    """
    geo = derive_geometry(trap)
    if pulse is None:
        pulse = PulseConfig.operating_point(20.0)
    pulse = normalize_pi_pulse(pulse)
    res = integrate_transfer(pulse)
    tf = min(1.0, max(0.0, 1.0 - res.p_remain))
    steps = StepDurations(cnot=cnot_time, emission=2 * tau, absorption=pulse.t_R)
    return ChannelSpec(
        p_c=geo.P_c,
        p_1=absorption_probability(geo.N, geo.w0, trap.wavelength),
        transfer_fidelity=tf,
        t2_collective=clock_shift_t2(to_cm3(trap.n0)),
        t_loss=t_loss,
        step_durations=steps,
    )


# ---------------------------------------------------------------------------
# channel primitives

def initial_state(qubit: SingleQubitState) -> DensityOperator:
    a = np.array([1, 0], dtype=complex)
    return tensor([qubit.vector, a, a, a, a], LABELS)


def mixed_cnot(state: DensityOperator, control: int, target: int, gate: GateSpec) -> DensityOperator:
    """Ideal CNOT followed by the gate's error channel on the target."""
    if control == target:
        raise ValueError("control and target must differ")
    for i in (control, target):
        if state.dims[i] != 2:
            raise ValueError("CNOT factors must be two-dimensional")
    out = apply_unitary(state, CNOT, (control, target))
    if gate.epsilon > 0:
        out = apply_channel(out, gate.kraus(), (target,))
    return out


def emit_photon(state: DensityOperator, ensemble: int, photon: int, chan: ChannelSpec
                ) -> DensityOperator:
    """Map ``|b_bar, 0>`` to ``sqrt(P_c)|a_bar, 1>`` plus an untracked loss branch."""
    occ = float(np.real(marginal(state, (photon,)).matrix[1, 1]))
    if occ > OCCUPANCY_ATOL:
        raise ValueError(f"photon mode already occupied (population {occ:.3e})")
    pc = chan.p_c
    # basis on (ensemble, photon): 0=|a0>, 1=|a1>, 2=|b0>, 3=|b1>
    K0 = np.zeros((4, 4), dtype=complex)
    K0[0, 0] = 1.0
    K0[1, 2] = math.sqrt(pc)
    K1 = np.zeros((4, 4), dtype=complex)
    K1[0, 2] = math.sqrt(1.0 - pc)
    K2 = np.zeros((4, 4), dtype=complex)
    K2[1, 1] = K2[3, 3] = 1.0
    return apply_channel(state, [K0, K1, K2], (ensemble, photon))


def absorb_photon(state: DensityOperator, photon: int, ensemble: int, chan: ChannelSpec
                  ) -> DensityOperator:
    """Map ``|1, a_bar>`` to ``sqrt(P_1 F_t)|0, b_bar>`` plus an untracked loss branch.

    The receiver is expected in ``|a_bar>``. A ``|0, b_bar>`` component already
    present keeps its population but not its coherence with ``|0, a_bar>``,
    since it shares the output state of the absorbed branch.
    """
    # basis on (photon, ensemble): 0=|0a>, 1=|0b>, 2=|1a>, 3=|1b>
    sub = marginal(state, (photon, ensemble)).matrix
    if photon > ensemble:
        sub = sub.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)
    occ = float(np.real(sub[3, 3]))
    if occ > OCCUPANCY_ATOL:
        raise ValueError(
            f"receiving ensemble already excited while a photon is present (population {occ:.3e})"
        )
    p = chan.absorption_success
    K0 = np.zeros((4, 4), dtype=complex)
    K0[0, 0] = 1.0
    K0[1, 2] = math.sqrt(p)
    K1 = np.zeros((4, 4), dtype=complex)
    K1[0, 2] = math.sqrt(1.0 - p)
    K2 = np.zeros((4, 4), dtype=complex)
    K2[1, 1] = K2[3, 3] = 1.0
    return apply_channel(state, [K0, K1, K2], (photon, ensemble))


def decohere(state: DensityOperator, ensembles: Sequence[int], elapsed: float,
             chan: ChannelSpec) -> DensityOperator:
    """Clock-shift dephasing and excitation loss on each listed ensemble."""
    if elapsed < 0:
        raise ValueError("elapsed must be non-negative")
    if elapsed == 0:
        return state
    lam = -math.expm1(-elapsed / chan.t2_collective)
    p_loss = -math.expm1(-elapsed / chan.t_loss)
    out = state
    for e in ensembles:
        if lam > 0:
            out = apply_channel(out, phase_damping(lam), (e,))
        if p_loss > 0:
            out = apply_channel(out, amplitude_damping(p_loss), (e,))
    return out


# ---------------------------------------------------------------------------
# full sequence

@dataclass(frozen=True)
class BudgetRow:
    source: str
    infidelity: float


@dataclass(frozen=True, eq=False)
class TransmissionResult:
    output_state: DensityOperator
    fidelity_to_target: float
    infidelity_budget: tuple[BudgetRow, ...]
    input: SingleQubitState
    include_disentangle: bool
    gates: tuple[GateSpec, ...]
    channel: ChannelSpec

    @property
    def infidelity(self) -> float:
        return 1.0 - self.fidelity_to_target

    def to_dict(self) -> dict:
        return {
            "input": {"c_a": [self.input.c_a.real, self.input.c_a.imag],
                      "c_b": [self.input.c_b.real, self.input.c_b.imag]},
            "params": {
                "include_disentangle": self.include_disentangle,
                "gates": [dict(asdict(g), epsilon=g.epsilon) for g in self.gates],
                "channel": _finite(asdict(self.channel)),
            },
            "fidelity": self.fidelity_to_target,
            "budget": [asdict(r) for r in infidelity_budget_report(self)],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _finite(d: dict) -> dict:
    """JSON has no infinity; disabled times are written as null."""
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out[k] = _finite(v)
        elif isinstance(v, float) and math.isinf(v):
            out[k] = None
        else:
            out[k] = v
    return out


def _gate_sequence(gates: Sequence[GateSpec]) -> tuple[GateSpec, ...]:
    gates = tuple(gates)
    if len(gates) == 3:
        gates = gates + (gates[2],)
    if len(gates) != 4:
        raise ValueError("expected 3 or 4 gate specs (the reset gate defaults to the third)")
    return gates


def target_ket(qubit: SingleQubitState, include_disentangle: bool) -> np.ndarray:
    """Target on (psi1, psi2)."""
    a, b = basis_ket(0), basis_ket(1)
    if include_disentangle:
        return np.kron(a, qubit.vector)
    return qubit.c_a * np.kron(a, a) + qubit.c_b * np.kron(b, b)


def simulate(qubit: SingleQubitState, gates: Sequence[GateSpec], chan: ChannelSpec,
             include_disentangle: bool = True) -> DensityOperator:
    g = _gate_sequence(gates)
    dt = chan.step_durations
    ens = (PHI1, PHI2)
    rho = initial_state(qubit)
    rho = decohere(mixed_cnot(rho, PSI1, PHI1, g[0]), ens, dt.cnot, chan)
    if include_disentangle:
        rho = decohere(mixed_cnot(rho, PHI1, PSI1, g[1]), ens, dt.cnot, chan)
    rho = decohere(emit_photon(rho, PHI1, PHOTON, chan), ens, dt.emission, chan)
    rho = decohere(absorb_photon(rho, PHOTON, PHI2, chan), ens, dt.absorption, chan)
    rho = decohere(mixed_cnot(rho, PHI2, PSI2, g[2]), ens, dt.cnot, chan)
    rho = decohere(mixed_cnot(rho, PSI2, PHI2, g[3]), ens, dt.cnot, chan)
    return rho


def _fidelity(rho: DensityOperator, qubit: SingleQubitState, include_disentangle: bool) -> float:
    return fidelity(marginal(rho, (PSI1, PSI2)), target_ket(qubit, include_disentangle))


def _only(source: str, gates: tuple[GateSpec, ...], chan: ChannelSpec):
    """Parameters with every error source except ``source`` idealized."""
    ideal_gates = tuple(replace(g, rabi=0.0) for g in gates)
    c = ChannelSpec.ideal(chan.step_durations)
    if source == "emission_loss":
        return ideal_gates, replace(c, p_c=chan.p_c)
    if source == "absorption_loss":
        return ideal_gates, replace(c, p_1=chan.p_1, transfer_fidelity=chan.transfer_fidelity)
    if source == "gate_error":
        return gates, c
    if source == "decoherence":
        return ideal_gates, replace(c, t2_collective=chan.t2_collective, t_loss=chan.t_loss)
    raise ValueError(f"unknown error source {source!r}")


def run_transmission(qubit: SingleQubitState, gates: Sequence[GateSpec], chan: ChannelSpec,
                     include_disentangle: bool = True, budget: bool = True) -> TransmissionResult:
    """Run the sequence and score (psi1, psi2) against the ideal output.

    The budget entry for each source is the infidelity of a run in which
    only that source is active.
    """
    g = _gate_sequence(gates)
    rho = simulate(qubit, g, chan, include_disentangle)
    F = _fidelity(rho, qubit, include_disentangle)
    rows = []
    if budget:
        for s in SOURCES:
            gs, cs = _only(s, g, chan)
            f_s = _fidelity(simulate(qubit, gs, cs, include_disentangle), qubit, include_disentangle)
            rows.append(BudgetRow(s, max(0.0, 1.0 - f_s)))
    return TransmissionResult(rho, F, tuple(rows), qubit, include_disentangle, g, chan)


def infidelity_budget_report(result: TransmissionResult) -> list[BudgetRow]:
    """Budget rows, largest first (ties keep the source order)."""
    return sorted(result.infidelity_budget, key=lambda r: -r.infidelity)


def emission_only_fidelity(qubit: SingleQubitState, p_c: float) -> float:
    """Closed form for a transfer whose only imperfection is emission loss."""
    pa, pb = abs(qubit.c_a) ** 2, abs(qubit.c_b) ** 2
    return (pa + math.sqrt(p_c) * pb) ** 2 + (1.0 - p_c) * pa * pb


def haar_qubits(n: int, seed: int | None = None) -> list[SingleQubitState]:
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
    return [SingleQubitState.normalized(*row) for row in z]
