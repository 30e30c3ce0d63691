"""One-clean-qubit circuit: exact evolution and finite-shot sampling.

The ancilla qubit runs H, P_phi, a controlled U on the qudit, then H, and
only the ancilla is measured.  Its Z expectation is the interference
signal

    <Z> = Re(e^{i phi} tr(U rho)) = 1/2 tr{rho (e^{i phi} U + e^{-i phi} U^dag)}

so ancilla statistics alone carry tr(U rho); the qudit register is never
read out, only traced over.

Gate conventions: P_phi = diag(1, e^{i phi}) on the ancilla, and the
controlled gate applies U when the ancilla is |1>.  All randomness flows
through explicit seeds (numpy PCG64); per-setting streams are derived with
numpy's SeedSequence keyed by spawn_key=(l, m), so settings can be sampled
in any order, or concurrently, with identical results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InternalError, ValidationError
from .qmath import DensityMatrix, as_complex_matrix, frozen, partial_trace, tensor_product

UNITARY_TOL = 1e-10

HADAMARD = frozen(np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0))
PAULI_Z2 = frozen(np.diag([1.0, -1.0]))
KET0_PROJECTOR = frozen(np.diag([1.0, 0.0]))


def phase_gate(phi: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * phi)])


def controlled(u: np.ndarray) -> np.ndarray:
    """Block unitary |0><0| (x) I + |1><1| (x) U on the ancilla-first space."""
    d = u.shape[0]
    c = np.zeros((2 * d, 2 * d), dtype=np.complex128)
    c[:d, :d] = np.eye(d)
    c[d:, d:] = u
    return c


@dataclass(frozen=True)
class Dqc1Setting:
    """Circuit parameters: the controlled unitary and the arm phase."""

    d: int
    unitary: np.ndarray
    phase: float

    def __post_init__(self):
        u = as_complex_matrix(self.unitary, "setting unitary")
        if u.shape != (self.d, self.d):
            raise ValidationError(
                f"setting unitary shape {u.shape} does not match d={self.d}"
            )
        defect = float(np.max(np.abs(u.conj().T @ u - np.eye(self.d))))
        if defect > UNITARY_TOL:
            raise ValidationError(f"setting matrix is not unitary: |U^dag U - I|_max = {defect:.3e}")
        object.__setattr__(self, "unitary", frozen(u))


@dataclass(frozen=True)
class ShotResult:
    """Counts of the two ancilla outcomes and the resulting <Z> estimate."""

    n_zero: int
    n_one: int
    n_total: int
    z_estimate: float

    def __post_init__(self):
        if self.n_total < 1 or self.n_zero < 0 or self.n_one < 0:
            raise ValidationError("shot counts must be non-negative with n_total >= 1")
        if self.n_zero + self.n_one != self.n_total:
            raise ValidationError("n_zero + n_one must equal n_total")
        if abs(self.z_estimate - (self.n_zero - self.n_one) / self.n_total) > 1e-12:
            raise ValidationError("z_estimate inconsistent with counts")


def _check_compatible(rho: DensityMatrix, setting: Dqc1Setting) -> None:
    if rho.dim != setting.d:
        raise ValidationError(f"state dim {rho.dim} does not match setting d={setting.d}")


def evolve_exact(rho: DensityMatrix, setting: Dqc1Setting) -> np.ndarray:
    """Full 2d x 2d output state of the circuit applied to |0><0| (x) rho."""
    _check_compatible(rho, setting)
    d = setting.d
    eye_d = np.eye(d)
    rho_in = tensor_product(KET0_PROJECTOR, rho.mat)
    total = (
        tensor_product(HADAMARD, eye_d)
        @ controlled(setting.unitary)
        @ tensor_product(phase_gate(setting.phase), eye_d)
        @ tensor_product(HADAMARD, eye_d)
    )
    return total @ rho_in @ total.conj().T


def reduced_ancilla(rho: DensityMatrix, setting: Dqc1Setting) -> np.ndarray:
    """2x2 ancilla state after the circuit (qudit traced out)."""
    return partial_trace(evolve_exact(rho, setting), [2, setting.d], keep=0)


def expectation_z(rho: DensityMatrix, setting: Dqc1Setting) -> float:
    """Closed-form ancilla <Z> = Re(e^{i phi} tr(U rho))."""
    _check_compatible(rho, setting)
    return float(np.real(np.exp(1j * setting.phase) * np.trace(setting.unitary @ rho.mat)))


def derive_setting_seed(master_seed: int, l: int, m: int) -> int:
    """Per-setting stream seed: SeedSequence(master, spawn_key=(l, m)).

    numpy's SeedSequence hashing makes the streams independent of
    evaluation order and of each other.
    """
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(l, m))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _bernoulli_counts(p_zero: float, shots: int, seed: int) -> tuple[int, int]:
    # Exact-probability sampling: the count of `shots` iid Bernoulli(p_zero)
    # draws is one binomial variate.
    if not -1e-10 <= p_zero <= 1.0 + 1e-10:
        raise InternalError(f"outcome probability {p_zero!r} outside [0, 1]; upstream bug")
    p_zero = min(max(p_zero, 0.0), 1.0)
    rng = np.random.default_rng(seed)
    n_zero = int(rng.binomial(shots, p_zero))
    return n_zero, shots - n_zero


def sample_shots(rho: DensityMatrix, setting: Dqc1Setting, shots: int, seed: int) -> ShotResult:
    """Finite-statistics <Z>: seeded Bernoulli sampling of the ancilla outcome."""
    if shots < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")
    p_zero = (1.0 + expectation_z(rho, setting)) / 2.0
    n_zero, n_one = _bernoulli_counts(p_zero, shots, seed)
    return ShotResult(
        n_zero=n_zero,
        n_one=n_one,
        n_total=shots,
        z_estimate=(n_zero - n_one) / shots,
    )
