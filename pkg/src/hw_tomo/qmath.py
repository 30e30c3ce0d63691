"""Dense complex linear algebra substrate used by every other module.

Conventions, fixed once for the whole package:

* matrices are row-major ``numpy`` arrays of ``complex128``;
* in tensor products the FIRST factor carries the slow index, and the
  ancilla always comes first;
* validation tolerances: hermiticity/trace/positivity at 1e-10.  qmath
  never repairs a state, it only accepts or rejects one (eigenvalue
  clipping lives in :func:`hw_tomo.tomography.project_physical`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
NORM_TOL = 1e-12


def as_complex_matrix(entries, context: str = "matrix") -> np.ndarray:
    """Coerce to a 2-d complex128 array, rejecting NaN/Inf entries."""
    m = np.asarray(entries, dtype=np.complex128)
    if m.ndim != 2:
        raise ValidationError(f"{context}: expected a 2-d array, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValidationError(f"{context}: empty matrix {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValidationError(f"{context}: entries must be finite (no NaN/Inf)")
    return m


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def hermiticity_defect(m: np.ndarray) -> float:
    """Max-norm distance from m to its own adjoint."""
    return float(np.max(np.abs(m - m.conj().T)))


def frozen(m: np.ndarray) -> np.ndarray:
    """Private read-only copy, safe to share between threads."""
    out = np.array(m, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, PSD matrix; all three checked on construction."""

    dim: int
    mat: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"dim must be positive, got {self.dim}")
        mat = as_complex_matrix(self.mat, "density matrix")
        if mat.shape != (self.dim, self.dim):
            raise ValidationError(
                f"density matrix: shape {mat.shape} does not match dim={self.dim}"
            )
        defect = hermiticity_defect(mat)
        if defect > HERMITIAN_TOL:
            raise ValidationError(
                f"density matrix violates hermiticity: |m - m^dag|_max = {defect:.3e}"
            )
        tr = np.trace(mat)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(
                f"density matrix violates unit trace: tr = {tr:.12g}"
            )
        lo = float(np.linalg.eigvalsh((mat + mat.conj().T) / 2.0).min())
        if lo < -PSD_TOL:
            raise ValidationError(
                f"density matrix violates positivity: min eigenvalue = {lo:.3e}"
            )
        object.__setattr__(self, "mat", frozen(mat))


@dataclass(frozen=True)
class PureState:
    """Normalized amplitude vector; convenience input converted to |psi><psi|."""

    dim: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.dim,):
            raise ValidationError(
                f"pure state: expected {self.dim} amplitudes, got shape {amps.shape}"
            )
        if not np.all(np.isfinite(amps.real)) or not np.all(np.isfinite(amps.imag)):
            raise ValidationError("pure state: amplitudes must be finite")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(
                f"pure state violates normalization: sum |a_i|^2 = {norm:.15g}"
            )
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def to_density(self) -> DensityMatrix:
        return DensityMatrix(self.dim, np.outer(self.amplitudes, self.amplitudes.conj()))


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the first factor as the slow index."""
    a = as_complex_matrix(a, "tensor_product: left factor")
    b = as_complex_matrix(b, "tensor_product: right factor")
    return np.kron(a, b)


def partial_trace(m: np.ndarray, dims, keep: int) -> np.ndarray:
    """Trace out every subsystem except ``keep``.

    ``dims`` lists the subsystem dimensions in slow-to-fast order (so the
    ancilla, when present, is ``dims[0]``); their product must equal the
    matrix size.
    """
    m = as_complex_matrix(m, "partial_trace")
    dims = [int(x) for x in dims]
    if any(x < 1 for x in dims):
        raise ValidationError(f"partial_trace: non-positive dims {dims}")
    total = math.prod(dims)
    if m.shape != (total, total):
        raise ValidationError(
            f"partial_trace: matrix shape {m.shape} does not match dims {dims}"
        )
    k = len(dims)
    if not 0 <= keep < k:
        raise ValidationError(f"partial_trace: keep={keep} out of range for {k} subsystems")
    t = m.reshape(tuple(dims) * 2)
    removed = 0
    for i in reversed(range(k)):
        if i == keep:
            continue
        t = np.trace(t, axis1=i, axis2=i + k - removed)
        removed += 1
    return t.reshape(dims[keep], dims[keep])


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    # Hermitian inputs only; tiny negative eigenvalues are numerical dust.
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


@dataclass(frozen=True)
class Metrics:
    fidelity: float
    trace_distance: float
    frobenius_distance: float


def metrics(a: DensityMatrix, b: DensityMatrix) -> Metrics:
    """Fidelity (tr sqrt(sqrt(a) b sqrt(a)))^2, trace distance, Frobenius distance."""
    if a.dim != b.dim:
        raise ValidationError(f"metrics: dimension mismatch {a.dim} vs {b.dim}")
    ra, rb = a.mat, b.mat
    sa = _psd_sqrt(ra)
    fid = float(np.trace(_psd_sqrt(sa @ rb @ sa)).real ** 2)
    diff = ra - rb
    w = np.linalg.eigvalsh((diff + diff.conj().T) / 2.0)
    return Metrics(
        fidelity=fid,
        trace_distance=float(0.5 * np.sum(np.abs(w))),
        frobenius_distance=float(np.linalg.norm(diff)),
    )


def random_density_matrix(d: int, rank: int, seed: int) -> DensityMatrix:
    """G G^dag / tr(G G^dag) for a seeded d x rank complex Gaussian G.

    Deterministic for fixed (d, rank, seed); rank=1 gives a pure state.
    """
    if d < 1:
        raise ValidationError(f"random_density_matrix: d must be positive, got {d}")
    if not 1 <= rank <= d:
        raise ValidationError(f"random_density_matrix: rank {rank} outside [1, {d}]")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    m /= np.trace(m).real
    return DensityMatrix(d, m)
