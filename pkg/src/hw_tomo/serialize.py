"""JSON/CSV conventions shared by every file the package reads or writes.

Complex numbers serialize as two-element arrays [re, im] (IEEE-754
doubles); matrices as row-major arrays of such pairs.  Every emitted file
carries a "version" field and is validated against the schemas shipped in
``hw_tomo/schemas`` before it hits disk; writes are atomic (temp file +
rename).  Floats go through Python's shortest round-trip repr, so an
emitted file parses back to bit-identical values.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from functools import lru_cache
from pathlib import Path

import jsonschema
import numpy as np

from . import hw_basis
from .errors import ValidationError
from .qmath import DensityMatrix, PureState
from .tomography import SQRT2, CoefficientTable, ReconstructionReport

SCHEMA_VERSION = 1
_SCHEMA_DIR = Path(__file__).parent / "schemas"

PRESET_MIXED = "maximally_mixed"
PRESET_BASIS = "basis"
PRESET_FOURIER = "fourier"


# ---------------------------------------------------------------- low level


def complex_pair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def vector_to_payload(v: np.ndarray) -> list:
    return [complex_pair(z) for z in np.asarray(v).ravel()]


def matrix_to_payload(m: np.ndarray) -> list:
    m = np.asarray(m)
    return [[complex_pair(z) for z in row] for row in m]


def _pair_to_complex(obj, context: str) -> complex:
    if (
        not isinstance(obj, (list, tuple))
        or len(obj) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj)
    ):
        raise ValidationError(f"{context}: expected a [re, im] number pair, got {obj!r}")
    if not (math.isfinite(obj[0]) and math.isfinite(obj[1])):
        raise ValidationError(f"{context}: non-finite entry {obj!r}")
    return complex(obj[0], obj[1])


def vector_from_payload(obj, context: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ValidationError(f"{context}: expected a non-empty array of [re, im] pairs")
    return np.array(
        [_pair_to_complex(x, f"{context}[{i}]") for i, x in enumerate(obj)],
        dtype=np.complex128,
    )


def matrix_from_payload(obj, context: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ValidationError(f"{context}: expected a non-empty array of rows")
    rows = []
    width = None
    for i, row in enumerate(obj):
        if not isinstance(row, list) or not row:
            raise ValidationError(f"{context}[{i}]: expected a non-empty row array")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ValidationError(
                f"{context}[{i}]: ragged matrix (row length {len(row)} != {width})"
            )
        rows.append([_pair_to_complex(x, f"{context}[{i}][{j}]") for j, x in enumerate(row)])
    return np.array(rows, dtype=np.complex128)


# ------------------------------------------------------------ file plumbing


def load_json(path: str | os.PathLike) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(payload, dict):
        raise ValidationError(f"{path}: top-level JSON value must be an object")
    return payload


@lru_cache(maxsize=None)
def schema(name: str) -> dict:
    schema_path = _SCHEMA_DIR / f"{name}.schema.json"
    with open(schema_path, encoding="utf-8") as fh:
        return json.load(fh)


def validate_payload(payload: dict, schema_name: str) -> None:
    try:
        jsonschema.validate(payload, schema(schema_name))
    except jsonschema.ValidationError as exc:
        raise ValidationError(
            f"{schema_name} schema violation at {exc.json_path}: {exc.message}"
        ) from exc


def write_json(path: str | os.PathLike, payload: dict, schema_name: str | None = None) -> None:
    """Schema-validate, then write atomically (temp file + rename)."""
    if schema_name is not None:
        validate_payload(payload, schema_name)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ------------------------------------------------------------- input states


def state_from_preset(d: int, preset: str) -> DensityMatrix:
    """maximally_mixed, basis:<j>, or fourier:<j> (column j of the d-dim DFT)."""
    if d < 2:
        raise ValidationError(f"qudit dimension must be >= 2, got {d}")
    if preset == PRESET_MIXED:
        return DensityMatrix(d, np.eye(d) / d)
    name, _, arg = preset.partition(":")
    if name in (PRESET_BASIS, PRESET_FOURIER):
        try:
            j = int(arg)
        except ValueError:
            raise ValidationError(f"preset {preset!r}: expected an integer index") from None
        if not 0 <= j < d:
            raise ValidationError(f"preset {preset!r}: index {j} outside [0, {d})")
        if name == PRESET_BASIS:
            amps = np.zeros(d, dtype=np.complex128)
            amps[j] = 1.0
        else:
            amps = np.exp(2j * np.pi * j * np.arange(d) / d) / math.sqrt(d)
        return PureState(d, amps).to_density()
    raise ValidationError(
        f"unknown preset {preset!r}; expected {PRESET_MIXED}, basis:<j> or fourier:<j>"
    )


def resolve_state(payload: dict) -> tuple[DensityMatrix, dict]:
    """Parse a state payload; returns the state plus a replayable copy."""
    validate_payload(payload, "state")
    d = payload["d"]
    kind = payload["kind"]
    if kind == "pure":
        if "amplitudes" not in payload:
            raise ValidationError("state of kind 'pure' needs an 'amplitudes' field")
        amps = vector_from_payload(payload["amplitudes"], "amplitudes")
        if amps.shape != (d,):
            raise ValidationError(f"amplitudes: expected {d} entries, got {amps.shape[0]}")
        rho = PureState(d, amps).to_density()
        resolved = {"d": d, "kind": "pure", "amplitudes": vector_to_payload(amps)}
    elif kind == "mixed":
        if "matrix" not in payload:
            raise ValidationError("state of kind 'mixed' needs a 'matrix' field")
        mat = matrix_from_payload(payload["matrix"], "matrix")
        if mat.shape != (d, d):
            raise ValidationError(f"matrix: expected {d}x{d}, got {mat.shape}")
        rho = DensityMatrix(d, mat)
        resolved = {"d": d, "kind": "mixed", "matrix": matrix_to_payload(mat)}
    else:
        if "preset" not in payload:
            raise ValidationError("state of kind 'preset' needs a 'preset' field")
        rho = state_from_preset(d, payload["preset"])
        resolved = {"d": d, "kind": "preset", "preset": payload["preset"]}
    return rho, resolved


def load_state(path: str | os.PathLike) -> tuple[DensityMatrix, dict]:
    return resolve_state(load_json(path))


# ------------------------------------------------------- coefficient tables


def coefficients_to_payload(table: CoefficientTable) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "d": table.d,
        "mode": table.mode,
        "shots": table.shots,
        "seed": table.master_seed,
        "values": [[float(x) for x in row] for row in table.values],
    }


def coefficients_from_payload(payload: dict) -> CoefficientTable:
    validate_payload(payload, "coefficients")
    values = np.array(payload["values"], dtype=np.float64)
    if values.shape != (payload["d"], payload["d"]):
        raise ValidationError(
            f"values: expected {payload['d']}x{payload['d']} table, got {values.shape}"
        )
    return CoefficientTable(
        d=payload["d"],
        values=values,
        mode=payload["mode"],
        shots=payload["shots"],
        master_seed=payload.get("seed"),
    )


def load_coefficients(path: str | os.PathLike) -> CoefficientTable:
    return coefficients_from_payload(load_json(path))


def write_coefficients_csv(table: CoefficientTable, path: str | os.PathLike) -> None:
    """CSV mirror of the table: one row per setting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["l", "m", "phi_lm", "z_mean", "q_lm"])
        for l in range(table.d):
            for m in range(table.d):
                q = float(table.values[l, m])
                writer.writerow(
                    [l, m, repr(hw_basis.phase_angle(table.d, l, m)), repr(q / SQRT2), repr(q)]
                )


# ------------------------------------------------------------------ reports


def metrics_to_payload(metrics) -> dict:
    return {
        "fidelity": metrics.fidelity,
        "trace_distance": metrics.trace_distance,
        "frobenius_distance": metrics.frobenius_distance,
    }


def report_to_payload(report: ReconstructionReport, config: dict) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "config": config,
        "d": report.coefficients.d,
        "coefficients": coefficients_to_payload(report.coefficients),
        "rho_raw": matrix_to_payload(report.rho_raw),
        "rho_physical": (
            None if report.rho_physical is None else matrix_to_payload(report.rho_physical.mat)
        ),
        "metrics": None if report.metrics is None else metrics_to_payload(report.metrics),
        "shots_per_setting": report.shots_per_setting,
        "total_shots": report.total_shots,
    }


# -------------------------------------------------------------- optics side


def plan_to_payload(plan) -> dict:
    elements = []
    for e in plan.elements:
        entry: dict = {"kind": e.kind}
        if e.k is not None:
            entry["k"] = e.k
        if e.l is not None:
            entry["l"] = e.l
        if e.phi is not None:
            entry["phi"] = e.phi
        entry["modes"] = None if e.modes is None else list(e.modes)
        elements.append(entry)
    return {
        "version": SCHEMA_VERSION,
        "d": plan.d,
        "target": list(plan.target),
        "layout": plan.layout,
        "elements": elements,
        "resources": dict(plan.resources),
    }


def verdicts_to_payload(d: int, verdicts) -> dict:
    """One result per setting; layouts verified for it appear as sub-checks."""
    by_setting: dict[tuple[int, int], dict] = {}
    order: list[tuple[int, int]] = []
    for v in verdicts:
        key = (v.l, v.m)
        if key not in by_setting:
            by_setting[key] = {"l": v.l, "m": v.m, "parallel": None, "serial": None}
            order.append(key)
        by_setting[key][v.layout] = {
            "distance": v.distance,
            "leakage": v.leakage,
            "pass": v.ok,
        }
    results = []
    for key in order:
        entry = by_setting[key]
        checks = [c for c in (entry["parallel"], entry["serial"]) if c is not None]
        entry["pass"] = bool(checks) and all(c["pass"] for c in checks)
        results.append(entry)
    return {
        "version": SCHEMA_VERSION,
        "d": d,
        "tolerance": 1e-10,
        "results": results,
        "all_pass": all(r["pass"] for r in results),
    }


def observables_to_payload(d: int, observables) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "d": d,
        "observables": [
            {"l": o.l, "m": o.m, "phase": o.phase, "matrix": matrix_to_payload(o.matrix)}
            for o in observables
        ],
    }
