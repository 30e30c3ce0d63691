"""Linear-optics realization of the Z^l X^m settings on an OAM qudit.

Element zoo (all modeled at the unitary level, lossless):

* ``SPP(k)``      spiral phase plate, |j>_OAM -> |j+k>_OAM;
* ``DovePair(l)`` two Dove prisms at relative angle pi*l/d, the diagonal
                  phase |k> -> e^{2 pi i l k / d} |k> (equals Z^l on OAM
                  values below d, and keeps acting by the same rule above);
* ``Sorter``      OAM demultiplexer |j>_OAM |p>_mode -> |j>_OAM |(j+p) mod d>_mode,
                  cyclic on spatial modes, with ``SorterInverse`` its adjoint;
* ``Beamsplitter`` / ``PhaseShift`` for the path qubit of the interferometer.

X_d^m compiles either serially (m repetitions of the single-step gate:
SPP(1), sort, SPP(-d) on mode 0, unsort) or in parallel (one SPP(m), sort,
SPP(-d) on each of the first m modes, unsort); the parallel layout saves
2m-2 sorters.  Z_d^l is one Dove pair.  Simulation runs on the composite
OAM-window x spatial-mode space (OAM-first ordering) with a finite window
[0, W); shifting population out of the window is a hard error, never a
silent truncation, so a plan's total operator is an exact partial isometry:
unitary on every basis state whose trajectory stays inside the window.

``simulate_mzi`` closes the loop: a two-beamsplitter interferometer on the
path qubit with the compiled gate in arm 1 reproduces the ancilla-circuit
statistics of :mod:`hw_tomo.dqc1` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from . import dqc1, hw_basis
from .errors import OutOfWindowError, ValidationError
from .qmath import DensityMatrix, as_complex_matrix, frozen, hermiticity_defect

GATE_TOL = 1e-10

# The interferometer beamsplitter is taken to BE the Hadamard, which makes
# the optical setup equal to the ancilla circuit exactly, not up to local
# phases.  The symmetric i-phase convention common in hardware is provided
# as an alternative constant only.
BEAMSPLITTER_HADAMARD = dqc1.HADAMARD
BEAMSPLITTER_SYMMETRIC = frozen(np.array([[1.0, 1.0j], [1.0j, 1.0]]) / np.sqrt(2.0))

SPP_KIND = "SPP"
DOVE_KIND = "DovePair"
SORTER_KIND = "Sorter"
SORTER_INV_KIND = "SorterInverse"
BEAMSPLITTER_KIND = "Beamsplitter"
PHASE_KIND = "PhaseShift"

_ELEMENT_KINDS = {
    SPP_KIND,
    DOVE_KIND,
    SORTER_KIND,
    SORTER_INV_KIND,
    BEAMSPLITTER_KIND,
    PHASE_KIND,
}


@dataclass(frozen=True)
class OpticalElement:
    """One optical element plus the spatial mode(s) it is placed on.

    ``modes=None`` means the element spans every spatial mode (sorters
    always do); a tuple lists the modes that carry their own copy of the
    element, e.g. one SPP(-d) plate per out-of-range mode.
    """

    kind: str
    k: int | None = None
    l: int | None = None
    phi: float | None = None
    modes: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in _ELEMENT_KINDS:
            raise ValidationError(f"unknown optical element kind {self.kind!r}")
        if self.kind == SPP_KIND:
            if self.k is None or self.k == 0:
                raise ValidationError("SPP order k must be a nonzero integer")
        if self.kind == DOVE_KIND and (self.l is None or self.l < 1):
            raise ValidationError("Dove pair order l must be >= 1")
        if self.kind == PHASE_KIND and self.phi is None:
            raise ValidationError("PhaseShift needs an angle")
        if self.modes is not None:
            object.__setattr__(self, "modes", tuple(int(p) for p in self.modes))


def _tally(layout: str, elements: tuple[OpticalElement, ...]) -> dict[str, int]:
    # SPP counts are per plate, i.e. one unit per spatial mode covered.
    counts = {"spp1": 0, "sppm": 0, "sppminusd": 0, "sorters": 0}
    for e in elements:
        if e.kind in (SORTER_KIND, SORTER_INV_KIND):
            counts["sorters"] += 1
        elif e.kind == SPP_KIND:
            units = len(e.modes) if e.modes is not None else 1
            if e.k < 0:
                counts["sppminusd"] += units
            elif layout == "serial":
                counts["spp1"] += units
            else:
                counts["sppm"] += units
    return counts


@dataclass(frozen=True)
class OpticalPlan:
    """Ordered element list realizing Z^l X^m, with its resource tally."""

    d: int
    target: tuple[int, int]
    layout: str
    elements: tuple[OpticalElement, ...]
    resources: dict[str, int] = field(default=None)  # computed, not an input

    def __post_init__(self):
        if self.layout not in ("serial", "parallel"):
            raise ValidationError(f"unknown layout {self.layout!r}")
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "target", (int(self.target[0]), int(self.target[1])))
        object.__setattr__(self, "resources", _tally(self.layout, self.elements))

    def max_up_shift(self) -> int:
        """Largest positive OAM shift any element applies."""
        return max((e.k for e in self.elements if e.kind == SPP_KIND and e.k > 0), default=0)

    def needs_sorter_modes(self) -> bool:
        return any(e.kind in (SORTER_KIND, SORTER_INV_KIND) for e in self.elements)


def compile_xm(d: int, m: int, layout: str) -> OpticalPlan:
    """Element sequence for the cyclic shift X_d^m in either layout."""
    if d < 2:
        raise ValidationError(f"qudit dimension must be >= 2, got {d}")
    if not 1 <= m < d:
        raise ValidationError(f"shift power m={m} outside [1, {d})")
    if layout == "parallel":
        elements = (
            OpticalElement(SPP_KIND, k=m, modes=(0,)),
            OpticalElement(SORTER_KIND),
            OpticalElement(SPP_KIND, k=-d, modes=tuple(range(m))),
            OpticalElement(SORTER_INV_KIND),
        )
    elif layout == "serial":
        block = (
            OpticalElement(SPP_KIND, k=1, modes=(0,)),
            OpticalElement(SORTER_KIND),
            OpticalElement(SPP_KIND, k=-d, modes=(0,)),
            OpticalElement(SORTER_INV_KIND),
        )
        elements = block * m
    else:
        raise ValidationError(f"unknown layout {layout!r}")
    return OpticalPlan(d=d, target=(0, m), layout=layout, elements=elements)


def compile_zlxm(d: int, l: int, m: int, layout: str = "parallel") -> OpticalPlan:
    """X_d^m stage (if any) followed by one Dove pair for Z_d^l (if any)."""
    if d < 2:
        raise ValidationError(f"qudit dimension must be >= 2, got {d}")
    if not (0 <= l < d and 0 <= m < d):
        raise ValidationError(f"target (l={l}, m={m}) outside [0, {d})")
    elements: tuple[OpticalElement, ...] = ()
    if m > 0:
        elements = compile_xm(d, m, layout).elements
    if l > 0:
        elements = elements + (OpticalElement(DOVE_KIND, l=l, modes=(0,)),)
    return OpticalPlan(d=d, target=(l, m), layout=layout, elements=elements)


def spp_unitary(k: int, window: int) -> np.ndarray:
    """Shift by k on the OAM window [0, window): a sub-permutation.

    Columns whose image would leave the window are zero; applying them to
    populated states is the caller's error and is caught at application
    time, never truncated silently.
    """
    if k == 0:
        raise ValidationError("SPP order k must be nonzero")
    if window < 2:
        raise ValidationError(f"OAM window must hold at least 2 values, got {window}")
    u = np.zeros((window, window), dtype=np.complex128)
    for j in range(window):
        if 0 <= j + k < window:
            u[j + k, j] = 1.0
    return u


def dove_pair_unitary(d: int, l: int, window: int) -> np.ndarray:
    """Diagonal phase e^{2 pi i l k / d} applied to every OAM value k in the window."""
    if d < 2:
        raise ValidationError(f"qudit dimension must be >= 2, got {d}")
    if not 1 <= l < d:
        raise ValidationError(f"Dove pair order l={l} outside [1, {d})")
    phases = np.exp(2j * np.pi * l * np.arange(window) / d)
    return np.diag(phases)


def _mode_index(j: int, p: int, n_modes: int) -> int:
    # OAM-first ordering on the composite space
    return j * n_modes + p


def sorter_unitary(d: int, window: int, n_modes: int | None = None) -> np.ndarray:
    """Composite permutation |j>_OAM |p>_mode -> |j>_OAM |(j+p) mod d>_mode."""
    if n_modes is None:
        n_modes = d
    if n_modes != d:
        raise ValidationError(f"sorter needs n_modes == d, got {n_modes} != {d}")
    dim = window * n_modes
    u = np.zeros((dim, dim), dtype=np.complex128)
    for j in range(window):
        for p in range(n_modes):
            u[_mode_index(j, (j + p) % d, n_modes), _mode_index(j, p, n_modes)] = 1.0
    return u


def element_unitary(elem: OpticalElement, d: int, window: int, n_modes: int) -> np.ndarray:
    """The element's operator on the composite OAM-window x mode space."""
    dim = window * n_modes
    if elem.kind == SORTER_KIND:
        return sorter_unitary(d, window, n_modes)
    if elem.kind == SORTER_INV_KIND:
        return sorter_unitary(d, window, n_modes).conj().T
    if elem.kind in (BEAMSPLITTER_KIND, PHASE_KIND):
        raise ValidationError(
            f"{elem.kind} acts on the interferometer path qubit, not the OAM/mode space"
        )
    if elem.kind == SPP_KIND:
        oam_op = spp_unitary(elem.k, window)
    else:
        oam_op = dove_pair_unitary(d, elem.l, window)
    placed = set(range(n_modes)) if elem.modes is None else set(elem.modes)
    if any(p < 0 or p >= n_modes for p in placed):
        raise ValidationError(f"element placed on modes {sorted(placed)} outside [0, {n_modes})")
    u = np.zeros((dim, dim), dtype=np.complex128)
    for p in range(n_modes):
        block = oam_op if p in placed else np.eye(window)
        u[p::n_modes, p::n_modes] = block
    return u


def plan_unitary(plan: OpticalPlan, window: int | None = None, n_modes: int | None = None) -> np.ndarray:
    """Product of the plan's element operators, first element applied first."""
    if window is None:
        window = 2 * plan.d
    if n_modes is None:
        n_modes = plan.d
    ops = [element_unitary(e, plan.d, window, n_modes) for e in plan.elements]
    dim = window * n_modes
    return reduce(lambda acc, u: u @ acc, ops, np.eye(dim, dtype=np.complex128))


def plan_isometry_defect(plan: OpticalPlan, window: int | None = None) -> float:
    """Deviation of T^dag T from a 0/1 diagonal.

    The total operator of a compiled plan is a partial isometry: every
    composite basis state either follows a unitary trajectory or exits the
    OAM window at some stage (zero column).  Returns the max-norm distance
    from that ideal.
    """
    t = plan_unitary(plan, window=window)
    g = t.conj().T @ t
    diag = np.real(np.diag(g)).copy()
    target = np.diag(np.where(diag > 0.5, 1.0, 0.0))
    return float(np.max(np.abs(g - target)))


@dataclass(frozen=True)
class OamModeState:
    """A ket or density matrix on the composite OAM-window x mode space."""

    oam_window: int
    n_modes: int
    ket: np.ndarray | None = None
    rho: np.ndarray | None = None

    def __post_init__(self):
        if self.oam_window < 2 or self.n_modes < 1:
            raise ValidationError(
                f"bad composite space: window={self.oam_window}, modes={self.n_modes}"
            )
        dim = self.oam_window * self.n_modes
        if (self.ket is None) == (self.rho is None):
            raise ValidationError("provide exactly one of ket= or rho=")
        if self.ket is not None:
            v = np.asarray(self.ket, dtype=np.complex128)
            if v.shape != (dim,):
                raise ValidationError(f"ket shape {v.shape} does not match composite dim {dim}")
            norm = float(np.sum(np.abs(v) ** 2))
            if abs(norm - 1.0) > 1e-12:
                raise ValidationError(f"ket norm^2 = {norm:.15g}, expected 1")
            v = v.copy()
            v.setflags(write=False)
            object.__setattr__(self, "ket", v)
        else:
            m = as_complex_matrix(self.rho, "OAM/mode density matrix")
            if m.shape != (dim, dim):
                raise ValidationError(f"rho shape {m.shape} does not match composite dim {dim}")
            if abs(np.trace(m) - 1.0) > 1e-12 or hermiticity_defect(m) > 1e-10:
                raise ValidationError("OAM/mode density matrix must be Hermitian with trace 1")
            object.__setattr__(self, "rho", frozen(m))

    @classmethod
    def basis(cls, window: int, n_modes: int, oam: int, mode: int = 0) -> "OamModeState":
        if not (0 <= oam < window and 0 <= mode < n_modes):
            raise ValidationError(f"basis labels (oam={oam}, mode={mode}) out of range")
        v = np.zeros(window * n_modes, dtype=np.complex128)
        v[_mode_index(oam, mode, n_modes)] = 1.0
        return cls(oam_window=window, n_modes=n_modes, ket=v)

    def mode_populations(self) -> np.ndarray:
        """Probability carried by each spatial mode."""
        if self.ket is not None:
            grid = np.abs(self.ket.reshape(self.oam_window, self.n_modes)) ** 2
            return grid.sum(axis=0)
        diag = np.real(np.diag(self.rho)).reshape(self.oam_window, self.n_modes)
        return diag.sum(axis=0)

    def oam_amplitudes_on_mode(self, mode: int) -> np.ndarray:
        """OAM amplitude vector conditional on one spatial mode (kets only)."""
        if self.ket is None:
            raise ValidationError("oam_amplitudes_on_mode needs a ket state")
        return self.ket.reshape(self.oam_window, self.n_modes)[:, mode].copy()


def simulate_plan(plan: OpticalPlan, state: OamModeState) -> OamModeState:
    """Apply each element in order; any out-of-window shift is an error."""
    window, n_modes = state.oam_window, state.n_modes
    if plan.needs_sorter_modes() and n_modes != plan.d:
        raise ValidationError(
            f"plan with sorters needs n_modes == d == {plan.d}, state has {n_modes}"
        )
    required = plan.d + plan.max_up_shift()
    if window < required:
        raise OutOfWindowError(
            f"OAM window [0, {window}) too small: this plan needs window >= {required}"
        )
    ket, rho = state.ket, state.rho
    for i, elem in enumerate(plan.elements):
        u = element_unitary(elem, plan.d, window, n_modes)
        if ket is not None:
            ket = u @ ket
            kept = float(np.sum(np.abs(ket) ** 2))
        else:
            rho = u @ rho @ u.conj().T
            kept = float(np.real(np.trace(rho)))
        if abs(kept - 1.0) > 1e-12:
            raise OutOfWindowError(
                f"element {i} ({elem.kind}, k={elem.k}) pushed population of weight "
                f"{1.0 - kept:.3e} outside the OAM window [0, {window})"
            )
    if ket is not None:
        return OamModeState(oam_window=window, n_modes=n_modes, ket=ket)
    return OamModeState(oam_window=window, n_modes=n_modes, rho=rho)


@dataclass(frozen=True)
class GateVerdict:
    """Operator-level comparison of a compiled plan against Z^l X^m."""

    d: int
    l: int
    m: int
    layout: str
    distance: float
    leakage: float
    ok: bool


def verify_plan(plan: OpticalPlan, l: int, m: int, window: int | None = None) -> GateVerdict:
    """Check a given plan against Z^l X^m on {OAM < d, mode 0} in and out.

    ``distance`` is the max-norm error of the restricted block;``leakage``
    is the worst column-weight missing from that block (population left on
    other modes, above d, or out the window).  Leakage is a reported
    failure, not an exception.
    """
    d = plan.d
    if window is None:
        window = 2 * d
    t = plan_unitary(plan, window=window)
    idx = np.array([_mode_index(j, 0, d) for j in range(d)])
    block = t[np.ix_(idx, idx)]
    target = hw_basis.weyl_unitary(d, l, m)
    distance = float(np.max(np.abs(block - target)))
    col_weight = np.sum(np.abs(block) ** 2, axis=0)
    leakage = float(np.max(np.abs(1.0 - col_weight)))
    return GateVerdict(
        d=d,
        l=l,
        m=m,
        layout=plan.layout,
        distance=distance,
        leakage=leakage,
        ok=bool(distance <= GATE_TOL and leakage <= GATE_TOL),
    )


def verify_gate_equivalence(d: int, l: int, m: int, layout: str = "parallel") -> GateVerdict:
    """Compile Z^l X^m and verify the compiled operator reproduces it."""
    return verify_plan(compile_zlxm(d, l, m, layout=layout), l, m)


def simulate_mzi(
    rho: DensityMatrix,
    l: int,
    m: int,
    phi: float,
    beamsplitter: np.ndarray | None = None,
) -> float:
    """Path-qubit <Z> of the two-beamsplitter interferometer of one setting.

    Path(2) (x) OAM(d) space, path first: beamsplitter, phase phi in arm 1,
    Z^l X^m on the OAM in arm 1 only, beamsplitter, then measure the path
    in the Z basis.
    """
    d = rho.dim
    if not (0 <= l < d and 0 <= m < d):
        raise ValidationError(f"setting (l={l}, m={m}) outside [0, {d})")
    bs = BEAMSPLITTER_HADAMARD if beamsplitter is None else as_complex_matrix(beamsplitter)
    eye_d = np.eye(d)
    arm_gate = dqc1.controlled(hw_basis.weyl_unitary(d, l, m))
    total = (
        np.kron(bs, eye_d)
        @ arm_gate
        @ np.kron(dqc1.phase_gate(phi), eye_d)
        @ np.kron(bs, eye_d)
    )
    rho_in = np.kron(dqc1.KET0_PROJECTOR, rho.mat)
    rho_out = total @ rho_in @ total.conj().T
    z_op = np.kron(dqc1.PAULI_Z2, eye_d)
    return float(np.real(np.trace(z_op @ rho_out)))
