"""Generalized Pauli operators and the Heisenberg-Weyl observable basis.

With omega = exp(2*pi*i/d), the shift and clock operators are

    X_d |j> = |j+1 mod d>        Z_d |j> = omega^j |j>

(unitary, not Hermitian, X^d = Z^d = I).  From them we build the d^2
Hermitian observables

    Q_lm = (1+i)/2 * e^{-i pi l m / d} * Z^l X^m  +  h.c.
         = (1/sqrt 2) * (e^{i phi_lm} Z^l X^m + h.c.),
    phi_lm = pi/4 - pi*l*m/d,

which are pairwise orthogonal, tr(Q_lm Q_l'm') = d * delta * delta, and
therefore a basis of d x d operators.  The half-integer power omega^{-lm/2}
is always evaluated as the principal exponential e^{-i pi l m / d}; the
phi_lm equality above only holds on that branch, and construction checks it.

Observables are cached per (d, l, m); cached arrays are read-only and the
caches are idempotent under concurrent first access.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError
from .qmath import frozen, hermiticity_defect

HW_HERMITIAN_TOL = 1e-12
HW_FORM_TOL = 1e-12
HW_NORM_TOL = 1e-9


def _check_dim(d: int) -> None:
    if d < 2:
        raise ValidationError(f"qudit dimension must be >= 2, got {d}")


def _check_labels(d: int, l: int, m: int) -> None:
    _check_dim(d)
    if not (0 <= l < d and 0 <= m < d):
        raise ValidationError(f"labels (l={l}, m={m}) outside [0, {d})")


@lru_cache(maxsize=None)
def pauli_x(d: int) -> np.ndarray:
    """Cyclic shift |j> -> |j+1 mod d|."""
    _check_dim(d)
    x = np.zeros((d, d), dtype=np.complex128)
    for j in range(d):
        x[(j + 1) % d, j] = 1.0
    return frozen(x)


@lru_cache(maxsize=None)
def pauli_z(d: int) -> np.ndarray:
    """Clock operator diag(1, omega, ..., omega^(d-1))."""
    _check_dim(d)
    omega_phases = np.exp(2j * np.pi * np.arange(d) / d)
    return frozen(np.diag(omega_phases))


def phase_angle(d: int, l: int, m: int) -> float:
    """phi_lm = pi/4 - pi*l*m/d, not reduced mod 2*pi."""
    _check_labels(d, l, m)
    return math.pi / 4 - math.pi * l * m / d


@lru_cache(maxsize=None)
def weyl_unitary(d: int, l: int, m: int) -> np.ndarray:
    """Z_d^l X_d^m, the controlled operator of the (l, m) setting."""
    _check_labels(d, l, m)
    zl = np.linalg.matrix_power(pauli_z(d), l)
    xm = np.linalg.matrix_power(pauli_x(d), m)
    return frozen(zl @ xm)


@dataclass(frozen=True)
class HWObservable:
    """One Hermitian basis element Q_lm together with its setting phase."""

    d: int
    l: int
    m: int
    phase: float
    matrix: np.ndarray

    def __post_init__(self):
        _check_labels(self.d, self.l, self.m)
        mat = np.asarray(self.matrix, dtype=np.complex128)
        if mat.shape != (self.d, self.d):
            raise ValidationError(
                f"observable matrix shape {mat.shape} does not match d={self.d}"
            )
        defect = hermiticity_defect(mat)
        if defect > HW_HERMITIAN_TOL:
            raise ValidationError(f"Q_{self.l}{self.m} not Hermitian: defect {defect:.3e}")
        # same operator written through the setting phase
        alt = np.exp(1j * self.phase) / math.sqrt(2) * weyl_unitary(self.d, self.l, self.m)
        alt = alt + alt.conj().T
        if float(np.max(np.abs(mat - alt))) > HW_FORM_TOL:
            raise ValidationError(
                f"Q_{self.l}{self.m} disagrees with its phase-form construction"
            )
        norm2 = np.trace(mat @ mat).real
        if abs(norm2 - self.d) > HW_NORM_TOL:
            raise ValidationError(
                f"Q_{self.l}{self.m} has tr(Q^2) = {norm2:.12g}, expected {self.d}"
            )
        object.__setattr__(self, "matrix", frozen(mat))


@lru_cache(maxsize=None)
def hw_observable(d: int, l: int, m: int) -> HWObservable:
    """Build (and cache) Q_lm = (1+i)/2 e^{-i pi lm/d} Z^l X^m + h.c."""
    _check_labels(d, l, m)
    pref = (1.0 + 1.0j) / 2.0 * np.exp(-1j * math.pi * l * m / d)
    half = pref * weyl_unitary(d, l, m)
    return HWObservable(d=d, l=l, m=m, phase=phase_angle(d, l, m), matrix=half + half.conj().T)


@lru_cache(maxsize=None)
def observable_stack(d: int) -> np.ndarray:
    """All Q_lm as one read-only (d, d, d, d) array indexed [l, m]."""
    _check_dim(d)
    stack = np.zeros((d, d, d, d), dtype=np.complex128)
    for l in range(d):
        for m in range(d):
            stack[l, m] = hw_observable(d, l, m).matrix
    stack.setflags(write=False)
    return stack


def verify_orthogonality(d: int) -> float:
    """Max deviation of the Gram matrix tr(Q_lm Q_l'm') from d * identity."""
    _check_dim(d)
    qs = observable_stack(d).reshape(d * d, d, d)
    gram = np.einsum("aij,bji->ab", qs, qs)
    return float(np.max(np.abs(gram - d * np.eye(d * d))))
