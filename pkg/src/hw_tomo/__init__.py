"""Qudit tomography from single-ancilla statistics in the Heisenberg-Weyl
basis, plus a linear-optics (OAM + interferometer) compiler and verifier."""

from .errors import InternalError, OutOfWindowError, ValidationError
from .qmath import DensityMatrix, Metrics, PureState, metrics, random_density_matrix
from .hw_basis import hw_observable, pauli_x, pauli_z, phase_angle, verify_orthogonality, weyl_unitary
from .dqc1 import Dqc1Setting, ShotResult, expectation_z, reduced_ancilla, sample_shots
from .tomography import (
    CoefficientTable,
    MeasurementPlan,
    ReconstructionReport,
    build_plan,
    estimate_coefficients,
    project_physical,
    reconstruct,
    run_tomography,
)
from .optics import (
    GateVerdict,
    OamModeState,
    OpticalElement,
    OpticalPlan,
    compile_xm,
    compile_zlxm,
    simulate_mzi,
    simulate_plan,
    verify_gate_equivalence,
)

__version__ = "0.1.0"

__all__ = [
    "CoefficientTable",
    "DensityMatrix",
    "Dqc1Setting",
    "GateVerdict",
    "InternalError",
    "MeasurementPlan",
    "Metrics",
    "OamModeState",
    "OpticalElement",
    "OpticalPlan",
    "OutOfWindowError",
    "PureState",
    "ReconstructionReport",
    "ShotResult",
    "ValidationError",
    "build_plan",
    "compile_xm",
    "compile_zlxm",
    "estimate_coefficients",
    "expectation_z",
    "hw_observable",
    "metrics",
    "pauli_x",
    "pauli_z",
    "phase_angle",
    "project_physical",
    "random_density_matrix",
    "reconstruct",
    "reduced_ancilla",
    "run_tomography",
    "sample_shots",
    "simulate_mzi",
    "simulate_plan",
    "verify_gate_equivalence",
    "verify_orthogonality",
    "weyl_unitary",
]
