import math

import numpy as np
import pytest

from hw_tomo.dqc1 import (
    Dqc1Setting,
    _bernoulli_counts,
    derive_setting_seed,
    evolve_exact,
    expectation_z,
    reduced_ancilla,
    sample_shots,
)
from hw_tomo.errors import InternalError, ValidationError
from hw_tomo.hw_basis import pauli_z, weyl_unitary
from hw_tomo.qmath import DensityMatrix, partial_trace, random_density_matrix

Z2 = np.diag([1.0, -1.0])


def identity_setting(d, phi):
    return Dqc1Setting(d=d, unitary=np.eye(d), phase=phi)


def ancilla_z(rho_out, d):
    return float(np.real(np.trace(np.kron(Z2, np.eye(d)) @ rho_out)))


class TestSettingValidation:
    def test_rejects_non_unitary(self):
        with pytest.raises(ValidationError, match="unitary"):
            Dqc1Setting(d=2, unitary=np.array([[1, 0], [0, 0.5]]), phase=0.0)

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValidationError):
            Dqc1Setting(d=3, unitary=np.eye(2), phase=0.0)

    def test_rejects_state_dimension_mismatch(self):
        rho = random_density_matrix(3, 3, seed=0)
        with pytest.raises(ValidationError):
            expectation_z(rho, identity_setting(4, 0.0))


class TestExactEvolution:
    def test_identity_gate_zero_phase_keeps_ancilla_in_zero(self):
        # both interferometer paths interfere constructively
        rho = random_density_matrix(3, 3, seed=1)
        out = evolve_exact(rho, identity_setting(3, 0.0))
        anc = partial_trace(out, [2, 3], keep=0)
        assert np.max(np.abs(anc - np.diag([1.0, 0.0]))) <= 1e-12

    def test_identity_gate_gives_cos_phi(self):
        # substitute U = I: <Z> = Re(e^{i phi} tr(rho)) = cos phi
        rho = random_density_matrix(4, 2, seed=2)
        for phi in (0.0, 0.4, math.pi / 2, 2.5):
            out = evolve_exact(rho, identity_setting(4, phi))
            assert abs(ancilla_z(out, 4) - math.cos(phi)) <= 1e-12

    def test_trace_and_hermiticity_preserved(self):
        for seed in range(10):
            d = 2 + seed % 5
            rho = random_density_matrix(d, d, seed=seed)
            u = weyl_unitary(d, seed % d, (seed + 1) % d)
            out = evolve_exact(rho, Dqc1Setting(d=d, unitary=u, phase=0.3 * seed))
            assert abs(np.trace(out) - 1.0) <= 1e-12
            assert np.max(np.abs(out - out.conj().T)) <= 1e-12

    def test_qudit_register_keeps_unit_trace(self):
        rho = random_density_matrix(5, 5, seed=3)
        out = evolve_exact(rho, Dqc1Setting(d=5, unitary=weyl_unitary(5, 2, 3), phase=1.1))
        qudit = partial_trace(out, [2, 5], keep=1)
        assert abs(np.trace(qudit) - 1.0) <= 1e-12


class TestReducedAncilla:
    def test_balanced_point_is_maximally_mixed(self):
        rho = random_density_matrix(3, 1, seed=4)
        anc = reduced_ancilla(rho, identity_setting(3, math.pi / 2))
        assert np.max(np.abs(anc - np.eye(2) / 2)) <= 1e-12

    def test_clock_gate_on_basis_state(self):
        # tr(U rho) = omega for rho = |1><1|, U = Z_3, so the diagonal is
        # (1 +/- cos(phi + 2 pi/3)) / 2
        rho = DensityMatrix(3, np.diag([0.0, 1.0, 0.0]))
        for phi in (0.0, 0.7, 1.9):
            anc = reduced_ancilla(rho, Dqc1Setting(d=3, unitary=pauli_z(3), phase=phi))
            p0 = (1 + math.cos(phi + 2 * math.pi / 3)) / 2
            assert abs(anc[0, 0].real - p0) <= 1e-12
            assert abs(anc[1, 1].real - (1 - p0)) <= 1e-12

    def test_diagonal_is_real_unit_range(self):
        for seed in range(5):
            d = 2 + seed
            rho = random_density_matrix(d, d, seed=seed)
            anc = reduced_ancilla(rho, Dqc1Setting(d=d, unitary=weyl_unitary(d, 1, 1), phase=0.2))
            for i in (0, 1):
                assert abs(anc[i, i].imag) <= 1e-12
                assert -1e-12 <= anc[i, i].real <= 1 + 1e-12

    def test_off_diagonal_vanishes_for_real_interference_term(self):
        # phase chosen so e^{i phi} tr(U rho) = e^{i phi} omega is real
        rho = DensityMatrix(3, np.diag([0.0, 1.0, 0.0]))
        anc = reduced_ancilla(rho, Dqc1Setting(d=3, unitary=pauli_z(3), phase=-2 * math.pi / 3))
        assert abs(anc[0, 1]) <= 1e-12
        assert abs(anc[1, 0]) <= 1e-12


class TestExpectationZ:
    def test_identity_gate(self):
        rho = random_density_matrix(3, 2, seed=5)
        for phi in (0.0, 1.0, -2.2):
            assert abs(expectation_z(rho, identity_setting(3, phi)) - math.cos(phi)) <= 1e-12

    def test_maximally_mixed_blind_to_traceless_gates(self):
        for d in (2, 3, 5):
            rho = DensityMatrix(d, np.eye(d) / d)
            for l in range(d):
                for m in range(d):
                    if (l, m) == (0, 0):
                        continue
                    setting = Dqc1Setting(d=d, unitary=weyl_unitary(d, l, m), phase=0.37)
                    assert abs(expectation_z(rho, setting)) <= 1e-12

    def test_clock_gate_on_ground_state(self):
        rho = DensityMatrix(4, np.diag([1.0, 0.0, 0.0, 0.0]))
        setting = Dqc1Setting(d=4, unitary=pauli_z(4), phase=0.0)
        assert abs(expectation_z(rho, setting) - 1.0) <= 1e-12

    @pytest.mark.parametrize("d", range(2, 9))
    def test_three_way_agreement(self, d):
        # closed form vs reduced-ancilla diagonal vs full 2d x 2d evolution
        rng = np.random.default_rng(100 + d)
        for trial in range(20):
            rho = random_density_matrix(d, 1 + trial % d, seed=1000 * d + trial)
            l, m = rng.integers(0, d, size=2)
            phi = float(rng.uniform(-math.pi, math.pi))
            setting = Dqc1Setting(d=d, unitary=weyl_unitary(d, int(l), int(m)), phase=phi)
            z_formula = expectation_z(rho, setting)
            anc = reduced_ancilla(rho, setting)
            z_reduced = float(np.real(np.trace(Z2 @ anc)))
            z_full = ancilla_z(evolve_exact(rho, setting), d)
            assert abs(z_formula - z_reduced) <= 1e-12
            assert abs(z_formula - z_full) <= 1e-12

    def test_affine_in_the_state(self):
        d = 4
        a = random_density_matrix(d, d, seed=8)
        b = random_density_matrix(d, 2, seed=9)
        mix = DensityMatrix(d, 0.3 * a.mat + 0.7 * b.mat)
        setting = Dqc1Setting(d=d, unitary=weyl_unitary(d, 1, 2), phase=0.9)
        expected = 0.3 * expectation_z(a, setting) + 0.7 * expectation_z(b, setting)
        assert abs(expectation_z(mix, setting) - expected) <= 1e-12


class TestSampling:
    def test_deterministic_outcome_at_unit_probability(self):
        rho = DensityMatrix(2, np.diag([1.0, 0.0]))
        setting = identity_setting(2, 0.0)  # <Z> = 1, p0 = 1
        for seed in (0, 1, 12345):
            res = sample_shots(rho, setting, shots=1000, seed=seed)
            assert res.n_one == 0 and res.n_zero == 1000
            assert res.z_estimate == 1.0

    def test_same_seed_same_result(self):
        rho = random_density_matrix(3, 3, seed=10)
        setting = Dqc1Setting(d=3, unitary=weyl_unitary(3, 1, 1), phase=0.5)
        a = sample_shots(rho, setting, shots=5000, seed=77)
        b = sample_shots(rho, setting, shots=5000, seed=77)
        assert (a.n_zero, a.n_one, a.z_estimate) == (b.n_zero, b.n_one, b.z_estimate)

    def test_estimate_converges_at_binomial_rate(self):
        # <Z> = cos(pi/3) = 0.5; standard error at 1e6 shots is ~8.7e-4, the
        # 5e-3 bound is ~5 sigma
        rho = random_density_matrix(3, 3, seed=11)
        setting = identity_setting(3, math.pi / 3)
        for seed in range(100):
            res = sample_shots(rho, setting, shots=10**6, seed=seed)
            assert abs(res.z_estimate - 0.5) <= 5e-3

    def test_counts_always_sum(self):
        rho = random_density_matrix(2, 2, seed=12)
        setting = Dqc1Setting(d=2, unitary=weyl_unitary(2, 1, 0), phase=0.1)
        for seed in range(20):
            res = sample_shots(rho, setting, shots=321, seed=seed)
            assert res.n_zero + res.n_one == res.n_total == 321
            assert -1.0 <= res.z_estimate <= 1.0

    def test_rejects_zero_shots(self):
        rho = random_density_matrix(2, 1, seed=13)
        with pytest.raises(ValidationError):
            sample_shots(rho, identity_setting(2, 0.0), shots=0, seed=0)

    def test_probability_out_of_range_is_internal_error(self):
        with pytest.raises(InternalError):
            _bernoulli_counts(1.2, 100, seed=0)
        with pytest.raises(InternalError):
            _bernoulli_counts(-0.1, 100, seed=0)


class TestSeedDerivation:
    def test_deterministic_and_distinct(self):
        seeds = {derive_setting_seed(42, l, m) for l in range(4) for m in range(4)}
        assert len(seeds) == 16
        assert derive_setting_seed(42, 2, 3) == derive_setting_seed(42, 2, 3)

    def test_depends_on_master(self):
        assert derive_setting_seed(1, 0, 0) != derive_setting_seed(2, 0, 0)
