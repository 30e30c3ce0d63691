"""Linear-inversion tomography from single-ancilla statistics.

A d-dimensional state is fixed by the d^2 coefficients <Q_lm> = tr(rho Q_lm),
and each coefficient is sqrt(2) times the ancilla <Z> of the circuit run
with U = Z^l X^m at phase phi_lm.  The pipeline is

    build_plan -> estimate_coefficients -> reconstruct -> project_physical

where reconstruct is rho_raw = (1/d) sum <Q_lm> Q_lm and project_physical
repairs shot noise by Frobenius projection onto unit-trace PSD matrices
(eigenvalue simplex projection; nothing iterative).

Settings are independent: sampled mode derives one seed per (l, m), and
results are written into the table by index, so any evaluation order (or a
thread pool) produces bit-identical output.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import dqc1, hw_basis, qmath
from .errors import ValidationError
from .qmath import DensityMatrix

SQRT2 = math.sqrt(2.0)
COEFF_BOUND = SQRT2 + 1e-9
RAW_HERMITIAN_TOL = 1e-8


@dataclass(frozen=True)
class PlanSetting:
    l: int
    m: int
    phase: float
    unitary: np.ndarray


@dataclass(frozen=True)
class MeasurementPlan:
    """The d^2 settings (l, m, phi_lm, Z^l X^m) in row-major (l outer) order."""

    d: int
    settings: tuple[PlanSetting, ...]

    def __post_init__(self):
        if len(self.settings) != self.d * self.d:
            raise ValidationError(
                f"plan must hold d^2 = {self.d * self.d} settings, got {len(self.settings)}"
            )
        seen = set()
        for s in self.settings:
            if (s.l, s.m) in seen:
                raise ValidationError(f"duplicate plan setting ({s.l}, {s.m})")
            seen.add((s.l, s.m))
            expected = hw_basis.phase_angle(self.d, s.l, s.m)
            if abs(s.phase - expected) > 1e-15:
                raise ValidationError(
                    f"setting ({s.l}, {s.m}) carries phase {s.phase}, expected {expected}"
                )


@lru_cache(maxsize=None)
def build_plan(d: int) -> MeasurementPlan:
    """Enumerate all (l, m) with their phases and controlled unitaries."""
    if d < 2:
        raise ValidationError(f"qudit dimension must be >= 2, got {d}")
    settings = tuple(
        PlanSetting(
            l=l,
            m=m,
            phase=hw_basis.phase_angle(d, l, m),
            unitary=hw_basis.weyl_unitary(d, l, m),
        )
        for l in range(d)
        for m in range(d)
    )
    return MeasurementPlan(d=d, settings=settings)


@dataclass(frozen=True)
class CoefficientTable:
    """Estimated <Q_lm> values; values[l][m] = sqrt(2) * <Z> of that setting."""

    d: int
    values: np.ndarray
    mode: str
    shots: int = 0
    master_seed: int | None = None

    def __post_init__(self):
        if self.mode not in ("exact", "sampled"):
            raise ValidationError(f"unknown coefficient mode {self.mode!r}")
        if self.mode == "sampled" and (self.shots < 1 or self.master_seed is None):
            raise ValidationError("sampled mode requires shots >= 1 and a master seed")
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.d, self.d):
            raise ValidationError(
                f"coefficient table shape {vals.shape} does not match d={self.d}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValidationError("coefficient table contains non-finite values")
        worst = float(np.max(np.abs(vals)))
        if worst > COEFF_BOUND:
            raise ValidationError(
                f"coefficient magnitude {worst:.12g} exceeds sqrt(2); |<Q_lm>| <= sqrt(2)"
            )
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def estimate_coefficients(
    rho: DensityMatrix,
    plan: MeasurementPlan,
    shots: int = 0,
    master_seed: int | None = None,
    *,
    pin_trace: bool = True,
    n_workers: int = 1,
) -> CoefficientTable:
    """Run every plan setting; shots=0 means exact expectations.

    With pin_trace (default) the (0, 0) entry is set to 1 analytically
    instead of sampled: Q_00 is the identity, so its coefficient is known.
    """
    if rho.dim != plan.d:
        raise ValidationError(f"state dim {rho.dim} does not match plan d={plan.d}")
    if shots < 0:
        raise ValidationError(f"shots must be >= 0, got {shots}")
    sampled = shots > 0
    if sampled and master_seed is None:
        raise ValidationError("sampled runs require an explicit master seed")

    values = np.zeros((plan.d, plan.d), dtype=np.float64)

    def one_setting(setting: PlanSetting) -> tuple[int, int, float]:
        if pin_trace and setting.l == 0 and setting.m == 0:
            return 0, 0, 1.0
        circuit = dqc1.Dqc1Setting(d=plan.d, unitary=setting.unitary, phase=setting.phase)
        if sampled:
            seed = dqc1.derive_setting_seed(master_seed, setting.l, setting.m)
            z = dqc1.sample_shots(rho, circuit, shots, seed).z_estimate
        else:
            z = dqc1.expectation_z(rho, circuit)
        return setting.l, setting.m, SQRT2 * z

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(one_setting, plan.settings))
    else:
        results = [one_setting(s) for s in plan.settings]
    for l, m, v in results:
        values[l, m] = v

    return CoefficientTable(
        d=plan.d,
        values=values,
        mode="sampled" if sampled else "exact",
        shots=shots,
        master_seed=master_seed if sampled else None,
    )


def reconstruct(coeffs: CoefficientTable) -> np.ndarray:
    """Linear inversion rho_raw = (1/d) sum values[l, m] Q_lm."""
    stack = hw_basis.observable_stack(coeffs.d)
    return np.einsum("lm,lmij->ij", coeffs.values, stack) / coeffs.d


def _project_simplex(w: np.ndarray) -> np.ndarray:
    # Euclidean projection onto {x_i >= 0, sum x = 1}: shift by a common
    # theta and clip, with theta from the sorted cumulative-sum rule.
    u = np.sort(w)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, len(w) + 1)
    k = int(j[u + (1.0 - css) / j > 0][-1])
    theta = (1.0 - css[k - 1]) / k
    return np.clip(w + theta, 0.0, None)


def project_physical(rho_raw: np.ndarray) -> DensityMatrix:
    """Closest (Frobenius) unit-trace PSD matrix, in the input's own eigenbasis.

    Idempotent; already-physical inputs come back unchanged up to the
    projection arithmetic (< 1e-10).
    """
    rho_raw = qmath.as_complex_matrix(rho_raw, "project_physical")
    if rho_raw.shape[0] != rho_raw.shape[1]:
        raise ValidationError(f"project_physical: matrix must be square, got {rho_raw.shape}")
    defect = qmath.hermiticity_defect(rho_raw)
    if defect > RAW_HERMITIAN_TOL:
        raise ValidationError(
            f"project_physical needs a Hermitian input: |m - m^dag|_max = {defect:.3e}"
        )
    herm = (rho_raw + rho_raw.conj().T) / 2.0
    w, v = np.linalg.eigh(herm)
    lam = _project_simplex(w)
    out = (v * lam) @ v.conj().T
    out = (out + out.conj().T) / 2.0
    return DensityMatrix(rho_raw.shape[0], out)


@dataclass(frozen=True)
class ReconstructionReport:
    """Everything one tomography run produced, plus quality metrics if the
    true state is known."""

    rho_raw: np.ndarray
    rho_physical: DensityMatrix | None
    coefficients: CoefficientTable
    metrics: qmath.Metrics | None
    shots_per_setting: int
    total_shots: int


def reconstruct_from_table(
    coeffs: CoefficientTable,
    *,
    rho_true: DensityMatrix | None = None,
    project: bool = True,
    pinned: bool | None = None,
) -> ReconstructionReport:
    """Rebuild a state from an (externally supplied or just-measured) table.

    ``pinned=None`` infers trace pinning from values[0, 0] == 1.0 exactly;
    a sampled unpinned entry is sqrt(2) * (rational) and can never hit 1.
    """
    rho_raw = reconstruct(coeffs)
    rho_physical = project_physical(rho_raw) if project else None
    report_metrics = None
    if rho_true is not None and rho_physical is not None:
        report_metrics = qmath.metrics(rho_physical, rho_true)
    if pinned is None:
        pinned = bool(coeffs.values[0, 0] == 1.0)
    sampled_settings = 0
    if coeffs.mode == "sampled":
        sampled_settings = coeffs.d * coeffs.d - (1 if pinned else 0)
    return ReconstructionReport(
        rho_raw=rho_raw,
        rho_physical=rho_physical,
        coefficients=coeffs,
        metrics=report_metrics,
        shots_per_setting=coeffs.shots,
        total_shots=coeffs.shots * sampled_settings,
    )


def run_tomography(
    rho_true: DensityMatrix,
    shots: int = 0,
    master_seed: int | None = None,
    *,
    pin_trace: bool = True,
    project: bool = True,
    n_workers: int = 1,
) -> ReconstructionReport:
    """Full pipeline on a known input state, scored against it."""
    plan = build_plan(rho_true.dim)
    coeffs = estimate_coefficients(
        rho_true, plan, shots, master_seed, pin_trace=pin_trace, n_workers=n_workers
    )
    return reconstruct_from_table(coeffs, rho_true=rho_true, project=project, pinned=pin_trace)
