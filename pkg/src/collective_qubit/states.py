"""Small-Hilbert-space state algebra: kets, density operators, Kraus channels.

Every factor in this package is two-dimensional (qubit, collective qubit, or
a photon mode truncated to {0, 1}). Basis index 0 is ``|a>``, ``|a_bar>`` or
vacuum, and index 1 is ``|b>``, ``|b_bar>`` or one photon.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

MAX_DIMENSION = 64

# Default tolerances; module-level so callers can tighten or relax them.
NORM_ATOL = 1e-12
HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-10
POSITIVITY_ATOL = 1e-9
KRAUS_ATOL = 1e-10


@dataclass(frozen=True)
class SingleQubitState:
    """Single-atom qubit ``c_a|a> + c_b|b>``."""

    c_a: complex
    c_b: complex

    def __post_init__(self):
        norm = abs(self.c_a) ** 2 + abs(self.c_b) ** 2
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"qubit amplitudes not normalized: |c_a|^2+|c_b|^2 = {norm!r}")

    @classmethod
    def normalized(cls, c_a: complex, c_b: complex) -> "SingleQubitState":
        norm = np.sqrt(abs(c_a) ** 2 + abs(c_b) ** 2)
        if norm == 0:
            raise ValueError("zero amplitude vector cannot be normalized")
        return cls(complex(c_a) / norm, complex(c_b) / norm)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.c_a, self.c_b], dtype=complex)


@dataclass(frozen=True)
class CollectiveQubitState:
    """Collective qubit ``c_abar|a_bar> + c_bbar|b_bar>`` of ``atom_count`` atoms.

    ``|b_bar>`` is the symmetric single excitation. Construct with
    ``strict=False`` to hold sub-normalized amplitudes from non-Hermitian
    dynamics.
    """

    c_abar: complex
    c_bbar: complex
    atom_count: int
    strict: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if self.atom_count < 1:
            raise ValueError("atom_count must be >= 1")
        if self.strict:
            norm = abs(self.c_abar) ** 2 + abs(self.c_bbar) ** 2
            if abs(norm - 1.0) > NORM_ATOL:
                raise ValueError(f"collective amplitudes not normalized: {norm!r}")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.c_abar, self.c_bbar], dtype=complex)


@dataclass(frozen=True)
class Factor:
    label: str
    dim: int = 2


@dataclass(frozen=True)
class JointLayout:
    factors: tuple[Factor, ...]

    def __post_init__(self):
        if not self.factors:
            raise ValueError("layout needs at least one factor")
        if self.dimension > MAX_DIMENSION:
            raise ValueError(
                f"joint dimension {self.dimension} exceeds the limit of {MAX_DIMENSION}"
            )

    @classmethod
    def of(cls, *labels: str) -> "JointLayout":
        return cls(tuple(Factor(lab) for lab in labels))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.dim for f in self.factors)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(f.label for f in self.factors)

    @property
    def dimension(self) -> int:
        return int(np.prod(self.dims))

    def __len__(self):
        return len(self.factors)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def sub(self, indices: Sequence[int]) -> "JointLayout":
        return JointLayout(tuple(self.factors[i] for i in indices))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    layout: JointLayout
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = self.layout.dimension
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match layout dimension {d}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        check_density(m)

    @classmethod
    def from_ket(cls, ket, layout: JointLayout) -> "DensityOperator":
        v = np.asarray(ket, dtype=complex).reshape(-1)
        return cls(layout, np.outer(v, v.conj()))

    @property
    def dims(self):
        return self.layout.dims

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix).min())

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).copy()


def check_density(m: np.ndarray) -> None:
    """Raise ``ValueError`` unless ``m`` is Hermitian, unit-trace and positive."""
    herm = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if herm > HERMITIAN_ATOL:
        raise ValueError(f"operator not Hermitian (max deviation {herm:.3e})")
    tr = np.trace(m).real
    if abs(tr - 1.0) > TRACE_ATOL:
        raise ValueError(f"trace {tr!r} differs from 1")
    lam = np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min()
    if lam < -POSITIVITY_ATOL:
        raise ValueError(f"negative eigenvalue {lam:.3e}")


def _as_factor(obj, label):
    if isinstance(obj, DensityOperator):
        return obj.layout, obj.matrix
    if isinstance(obj, SingleQubitState):
        v = obj.vector
        label = label or "qubit"
    elif isinstance(obj, CollectiveQubitState):
        v = obj.vector
        label = label or "ensemble"
    else:
        v = np.asarray(obj, dtype=complex).reshape(-1)
        if v.size != 2:
            raise ValueError("bare kets must be two-dimensional")
        n = np.linalg.norm(v)
        if abs(n - 1.0) > NORM_ATOL:
            raise ValueError(f"ket not normalized (norm {n!r})")
    return JointLayout((Factor(label or "factor", v.size),)), np.outer(v, v.conj())


def tensor(factors: Sequence, labels: Sequence[str] | None = None) -> DensityOperator:
    """Kronecker product of pure states and/or density operators, in order.

    ``labels`` names the resulting factors of any non-``DensityOperator``
    input (density operators keep their own layouts).
    """
    if len(factors) == 0:
        raise ValueError("tensor needs at least one factor")
    if labels is not None and len(labels) != len(factors):
        raise ValueError("labels must match factors one-to-one")
    parts = []
    total = 1
    for i, f in enumerate(factors):
        layout, m = _as_factor(f, None if labels is None else labels[i])
        total *= layout.dimension
        if total > MAX_DIMENSION:
            raise ValueError(f"combined dimension exceeds the limit of {MAX_DIMENSION}")
        parts.append((layout, m))
    layout = JointLayout(tuple(fac for lay, _ in parts for fac in lay.factors))
    mat = parts[0][1]
    for _, m in parts[1:]:
        mat = np.kron(mat, m)
    return DensityOperator(layout, mat)


def _check_targets(layout: JointLayout, targets: Sequence[int]) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if not targets:
        raise ValueError("no target factors given")
    if len(set(targets)) != len(targets):
        raise ValueError(f"repeated factor index in {targets}")
    for t in targets:
        if not 0 <= t < len(layout):
            raise ValueError(f"factor index {t} out of range for {len(layout)} factors")
    return targets


def _apply_local(rho_t: np.ndarray, op: np.ndarray, targets, tdims, n: int) -> np.ndarray:
    """Return ``(op x I) rho (op x I)^dagger`` on the reshaped tensor ``rho_t``."""
    k = len(targets)
    op_t = op.reshape(tuple(tdims) + tuple(tdims))
    ket_axes = list(targets)
    bra_axes = [n + t for t in targets]
    # left multiply on ket indices
    out = np.tensordot(op_t, rho_t, axes=(list(range(k, 2 * k)), ket_axes))
    out = np.moveaxis(out, list(range(k)), ket_axes)
    # right multiply by op^dagger on bra indices
    out = np.tensordot(out, op_t.conj(), axes=(bra_axes, list(range(k, 2 * k))))
    out = np.moveaxis(out, list(range(2 * n - k, 2 * n)), bra_axes)
    return out


def apply_channel(state: DensityOperator, kraus_set: Sequence, target_factors: Sequence[int]
                  ) -> DensityOperator:
    """Apply a trace-preserving Kraus map to the listed factors."""
    targets = _check_targets(state.layout, target_factors)
    dims = state.dims
    dt = int(np.prod([dims[t] for t in targets]))
    ops = [np.asarray(K, dtype=complex) for K in kraus_set]
    if not ops:
        raise ValueError("empty Kraus set")
    for K in ops:
        if K.shape != (dt, dt):
            raise ValueError(f"Kraus operator shape {K.shape} does not match target dimension {dt}")
    completeness = sum(K.conj().T @ K for K in ops)
    dev = np.max(np.abs(completeness - np.eye(dt)))
    if dev > KRAUS_ATOL:
        raise ValueError(f"Kraus set is not trace preserving (max deviation {dev:.3e})")
    n = len(dims)
    rho_t = state.matrix.reshape(dims + dims)
    tdims = [dims[t] for t in targets]
    out = sum(_apply_local(rho_t, K, targets, tdims, n) for K in ops)
    d = state.layout.dimension
    m = out.reshape(d, d)
    return DensityOperator(state.layout, 0.5 * (m + m.conj().T))


def apply_unitary(state: DensityOperator, unitary, target_factors: Sequence[int]) -> DensityOperator:
    return apply_channel(state, [unitary], target_factors)


def marginal(state: DensityOperator, keep_factors: Sequence[int]) -> DensityOperator:
    """Partial trace keeping ``keep_factors`` (returned in ascending order)."""
    keep = sorted(_check_targets(state.layout, keep_factors))
    dims = state.dims
    n = len(dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    ket = list(letters[:n])
    bra = list(letters[n:2 * n])
    for i in range(n):
        if i not in keep:
            bra[i] = ket[i]
    out = "".join(ket[i] for i in keep) + "".join(bra[i] for i in keep)
    red = np.einsum("".join(ket) + "".join(bra) + "->" + out, state.matrix.reshape(dims + dims))
    dk = int(np.prod([dims[i] for i in keep]))
    return DensityOperator(state.layout.sub(keep), red.reshape(dk, dk))


def fidelity(state: DensityOperator, target) -> float:
    """``<psi|rho|psi>`` for a pure target given as a ket or a rank-1 operator."""
    if isinstance(target, DensityOperator):
        if target.layout != state.layout:
            raise ValueError(f"layout mismatch: {target.layout.labels} vs {state.layout.labels}")
        if abs(target.purity() - 1.0) > 1e-9:
            raise ValueError("fidelity target must be a pure state")
        val = np.real(np.trace(state.matrix @ target.matrix))
    else:
        v = np.asarray(target, dtype=complex).reshape(-1)
        if v.size != state.layout.dimension:
            raise ValueError(
                f"layout mismatch: target dimension {v.size} vs state dimension "
                f"{state.layout.dimension}"
            )
        val = np.real(v.conj() @ state.matrix @ v)
    return float(min(1.0, max(0.0, val)))


def basis_ket(*bits: int) -> np.ndarray:
    """Computational basis ket ``|bits>`` on ``len(bits)`` two-level factors."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int("".join(str(b) for b in bits), 2) if bits else 0] = 1.0
    return v


# ---------------------------------------------------------------------------
# common single-factor Kraus sets

def amplitude_damping(p: float) -> list[np.ndarray]:
    """|1> -> |0> with probability ``p``."""
    return [np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex),
            np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex)]


def phase_damping(lam: float) -> list[np.ndarray]:
    """Off-diagonals scaled by ``1 - lam``; populations untouched."""
    s = 1.0 - lam
    return [np.array([[1, 0], [0, s]], dtype=complex),
            np.array([[0, 0], [0, np.sqrt(1 - s * s)]], dtype=complex)]


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def depolarizing(p: float) -> list[np.ndarray]:
    """rho -> (1-p) rho + p I/2."""
    return [np.sqrt(1 - 0.75 * p) * np.eye(2, dtype=complex),
            np.sqrt(p / 4) * PAULI_X, np.sqrt(p / 4) * PAULI_Y, np.sqrt(p / 4) * PAULI_Z]


def phase_flip(p: float) -> list[np.ndarray]:
    return [np.sqrt(1 - p) * np.eye(2, dtype=complex), np.sqrt(p) * PAULI_Z]
