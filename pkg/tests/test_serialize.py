import json
import math

import jsonschema
import numpy as np
import pytest

from hw_tomo import serialize
from hw_tomo.errors import ValidationError
from hw_tomo.qmath import random_density_matrix
from hw_tomo.tomography import build_plan, estimate_coefficients

SCHEMA_NAMES = ["state", "coefficients", "report", "plan", "verdict", "observables"]


class TestComplexConvention:
    def test_matrix_roundtrip(self):
        m = random_density_matrix(3, 3, seed=1).mat
        payload = serialize.matrix_to_payload(m)
        back = serialize.matrix_from_payload(payload, "matrix")
        assert np.array_equal(m, back)

    def test_pair_layout(self):
        assert serialize.complex_pair(1.5 - 2.5j) == [1.5, -2.5]

    def test_rejects_bad_pairs(self):
        with pytest.raises(ValidationError, match=r"\[re, im\]"):
            serialize.matrix_from_payload([[[1.0]]], "matrix")
        with pytest.raises(ValidationError, match="ragged"):
            serialize.matrix_from_payload([[[1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]], "matrix")
        with pytest.raises(ValidationError, match="non-finite"):
            serialize.vector_from_payload([[math.inf, 0.0]], "vector")


class TestStates:
    def test_maximally_mixed_preset(self):
        rho = serialize.state_from_preset(3, "maximally_mixed")
        assert np.max(np.abs(rho.mat - np.eye(3) / 3)) <= 1e-15

    def test_basis_preset(self):
        rho = serialize.state_from_preset(4, "basis:2")
        expected = np.zeros((4, 4))
        expected[2, 2] = 1.0
        assert np.max(np.abs(rho.mat - expected)) <= 1e-15

    def test_fourier_preset_columns_are_orthonormal(self):
        d = 5
        states = [serialize.state_from_preset(d, f"fourier:{j}") for j in range(d)]
        for j, a in enumerate(states):
            for k, b in enumerate(states):
                overlap = np.trace(a.mat @ b.mat).real
                assert abs(overlap - (1.0 if j == k else 0.0)) <= 1e-12

    def test_unknown_preset(self):
        with pytest.raises(ValidationError, match="preset"):
            serialize.state_from_preset(3, "thermal")
        with pytest.raises(ValidationError, match="outside"):
            serialize.state_from_preset(3, "basis:3")

    def test_resolve_pure_state(self):
        amps = np.array([1.0, 1.0j]) / math.sqrt(2)
        payload = {"d": 2, "kind": "pure", "amplitudes": serialize.vector_to_payload(amps)}
        rho, resolved = serialize.resolve_state(payload)
        assert abs(rho.mat[0, 1] - (-0.5j)) <= 1e-15
        assert resolved["kind"] == "pure"

    def test_resolve_rejects_unphysical_matrix(self):
        payload = {
            "d": 2,
            "kind": "mixed",
            "matrix": serialize.matrix_to_payload(np.diag([1.2, -0.2])),
        }
        with pytest.raises(ValidationError, match="positivity"):
            serialize.resolve_state(payload)

    def test_resolve_rejects_schema_violation(self):
        with pytest.raises(ValidationError, match="schema"):
            serialize.resolve_state({"d": 2, "kind": "plasma"})


class TestFiles:
    def test_load_json_reports_position(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"d": 2,\n  "kind": }\n')
        with pytest.raises(ValidationError, match="line 2"):
            serialize.load_json(bad)

    def test_write_json_validates_first(self, tmp_path):
        target = tmp_path / "out.json"
        with pytest.raises(ValidationError):
            serialize.write_json(target, {"version": 1}, "coefficients")
        assert not target.exists()

    def test_write_json_is_atomic_and_parseable(self, tmp_path):
        target = tmp_path / "sub" / "coeffs.json"
        rho = random_density_matrix(2, 2, seed=3)
        table = estimate_coefficients(rho, build_plan(2))
        serialize.write_json(target, serialize.coefficients_to_payload(table), "coefficients")
        assert json.loads(target.read_text())["d"] == 2
        assert not list(target.parent.glob("*.tmp"))


class TestCoefficients:
    def test_roundtrip(self):
        rho = random_density_matrix(3, 3, seed=4)
        table = estimate_coefficients(rho, build_plan(3), shots=500, master_seed=9)
        payload = serialize.coefficients_to_payload(table)
        back = serialize.coefficients_from_payload(payload)
        assert np.array_equal(back.values, table.values)
        assert back.mode == "sampled" and back.shots == 500 and back.master_seed == 9

    def test_csv_mirror_layout(self, tmp_path):
        rho = random_density_matrix(2, 2, seed=5)
        table = estimate_coefficients(rho, build_plan(2))
        path = tmp_path / "table.csv"
        serialize.write_coefficients_csv(table, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "l,m,phi_lm,z_mean,q_lm"
        assert len(lines) == 5
        first = lines[1].split(",")
        assert first[:2] == ["0", "0"]
        assert float(first[2]) == pytest.approx(math.pi / 4)
        assert float(first[4]) == pytest.approx(math.sqrt(2) * float(first[3]))


class TestSchemas:
    @pytest.mark.parametrize("name", SCHEMA_NAMES)
    def test_schema_files_are_valid(self, name):
        jsonschema.Draft202012Validator.check_schema(serialize.schema(name))

    def test_all_schemas_shipped(self):
        for name in SCHEMA_NAMES:
            assert serialize.schema(name)["title"].startswith("hw-tomo")
