import math
import warnings

import numpy as np
import pytest

from gausslab.constraints import ConstraintSpec, scenario_one
from gausslab.entropy import renyi_trace_mixed, renyi_trace_single
from gausslab.replica import (
    a_tilde,
    build_replica_matrices,
    constraint_block,
    delta_j,
    delta_j_direct,
    delta_j_intermediate,
    final_identity_check,
    j_geometric_identity_check,
    master_determinant,
    prefactor_integral,
    prefactor_integral_mc,
    renyi_product,
    saddle_point_solution,
    saddle_residuals,
    toeplitz_cofactor,
    toeplitz_cofactor_direct,
)
from gausslab.symplectic import covariance_from_symplectic, random_symplectic, restrict


class TestReplicaMatrices:
    def test_x3_explicit(self):
        rm = build_replica_matrices(3)
        np.testing.assert_array_equal(rm.j, [[0, 1], [-1, 0]])
        np.testing.assert_array_equal(rm.m, [[2, 1], [1, 2]])
        np.testing.assert_array_equal(rm.t, [[0, 1], [-1, 0]])

    def test_x2_degenerate(self):
        rm = build_replica_matrices(2)
        np.testing.assert_array_equal(rm.j, [[0]])
        np.testing.assert_array_equal(rm.m, [[2]])
        np.testing.assert_array_equal(rm.t, [[-1]])

    @pytest.mark.parametrize("x", range(2, 13))
    def test_antiperiodicity_exact_integer(self, x):
        t = build_replica_matrices(x).t
        power = np.linalg.matrix_power(t, x - 1)
        np.testing.assert_array_equal(power, -np.eye(x - 1, dtype=int))

    @pytest.mark.parametrize("x", range(2, 10))
    def test_shift_eigenvalues(self, x):
        t = build_replica_matrices(x).t
        expected = np.sort_complex(
            [np.exp(1j * np.pi * (2 * ell - 1) / (x - 1)) for ell in range(1, x)]
        )
        np.testing.assert_allclose(np.sort_complex(np.linalg.eigvals(t)), expected, atol=1e-12)

    @pytest.mark.parametrize("x", range(2, 13))
    def test_determinants(self, x):
        rm = build_replica_matrices(x)
        assert np.linalg.det(rm.m.astype(float)) == pytest.approx(x, rel=1e-10)
        assert np.linalg.det(np.eye(x - 1) - rm.t) == pytest.approx(2.0, rel=1e-10)

    def test_j_above_diagonal(self):
        j = build_replica_matrices(6).j
        assert np.all(j[np.triu_indices(5, k=1)] == 1)
        np.testing.assert_array_equal(j, -j.T)
        # J is the geometric sum of shift powers
        t = build_replica_matrices(6).t
        acc = sum(np.linalg.matrix_power(t, ell) for ell in range(1, 5))
        np.testing.assert_array_equal(j, acc)

    def test_rejects_small_x(self):
        with pytest.raises(ValueError):
            build_replica_matrices(1)


class TestJGeometric:
    def test_x3_exact(self):
        assert j_geometric_identity_check(3) == 0.0

    @pytest.mark.parametrize("x", range(3, 13))
    def test_sweep(self, x):
        assert j_geometric_identity_check(x) <= 1e-12


class TestMasterDeterminant:
    def test_x2_is_inverse_sqrt_det(self):
        chat = constraint_block([2.0, 3.5])
        assert master_determinant(chat, 2) == pytest.approx(
            1.0 / np.sqrt(np.linalg.det(chat)), rel=1e-12
        )

    def test_single_mode_x3(self):
        assert master_determinant(constraint_block([2.0]), 3) == pytest.approx(
            4.0 / 13.0, rel=1e-12
        )

    def test_factorizes_over_modes(self):
        mus = (2.0, 3.0)
        got = master_determinant(constraint_block(mus), 4)
        per_mode = np.prod([master_determinant(constraint_block([mu]), 4) for mu in mus])
        assert got == pytest.approx(per_mode, rel=1e-11)

    def test_general_covariance_uses_symplectic_spectrum(self):
        # a correlated physical block: the determinant only sees the spectrum
        c = covariance_from_symplectic(random_symplectic(3, 0.8, seed=8))
        c_a = restrict(c, [0, 1])
        for x in (2, 3, 5):
            assert master_determinant(c_a, x) == pytest.approx(
                renyi_trace_mixed(c_a, x), rel=1e-9
            )

    def test_unphysical_input_raises(self):
        with pytest.raises(ValueError):
            master_determinant(np.diag([1.0, -1.0]), 3)

    def test_bad_shape(self):
        with pytest.raises(ValueError):
            master_determinant(np.eye(3), 3)


class TestToeplitz:
    def test_hand_value(self):
        # 1x1 determinant -2(mu^2+1) = -10 at mu = 2, x = 3
        assert toeplitz_cofactor(2.0, 3) == pytest.approx(-10.0)
        assert toeplitz_cofactor_direct(2.0, 3) == pytest.approx(-10.0)

    def test_near_pure_limit(self):
        mu = 1.0 + 1e-6
        for x in (3, 5, 8):
            closed = toeplitz_cofactor(mu, x)
            direct = toeplitz_cofactor_direct(mu, x)
            assert closed == pytest.approx(direct, rel=1e-9)

    @pytest.mark.parametrize("x", range(3, 10))
    def test_closed_vs_direct(self, x):
        for mu in (1.5, 2.0, 5.0, 10.0):
            assert toeplitz_cofactor(mu, x) == pytest.approx(
                toeplitz_cofactor_direct(mu, x), rel=1e-10
            )

    def test_sign_alternates(self):
        for x in range(3, 9):
            assert math.copysign(1.0, toeplitz_cofactor(2.0, x)) == (-1) ** x

    def test_empty_at_x2(self):
        assert toeplitz_cofactor(3.0, 2) == 1.0
        assert toeplitz_cofactor_direct(3.0, 2) == 1.0


class TestDelta:
    def test_frozen_value_x2(self):
        # oracle: det(mu^2 M - J M^{-1} J) with 1x1 matrices gives 2 mu^2 = 18
        assert delta_j_direct(3.0, 2) == pytest.approx(18.0, rel=1e-12)
        assert delta_j(3.0, 2) == pytest.approx(18.0, rel=1e-12)
        assert delta_j_intermediate(3.0, 2) == pytest.approx(18.0, rel=1e-12)

    @pytest.mark.parametrize("x", range(2, 9))
    def test_closed_vs_intermediate(self, x):
        for mu in (1.0 + 1e-6, 1.5, 2.0, 5.0, 10.0):
            assert delta_j(mu, x) == pytest.approx(delta_j_intermediate(mu, x), rel=1e-10)

    @pytest.mark.parametrize("x", range(2, 9))
    def test_closed_vs_replica_definition(self, x):
        for mu in (1.2, 2.0, 4.0):
            assert delta_j(mu, x) == pytest.approx(delta_j_direct(mu, x), rel=1e-9)

    @pytest.mark.parametrize("x", range(2, 9))
    def test_pure_limit_gives_unit_trace(self, x):
        # per-mode trace (2^{x-1}/sqrt(x)) Delta^{-1/2} must be 1 at mu = 1
        val = 2.0 ** (x - 1) / math.sqrt(x) / math.sqrt(delta_j(1.0, x))
        assert val == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("x", range(2, 9))
    def test_chain_reproduces_renyi(self, x):
        for mu in (1.5, 3.0, 7.0):
            val = 2.0 ** (x - 1) / math.sqrt(x) / math.sqrt(delta_j(mu, x))
            assert val == pytest.approx(renyi_trace_single(mu, x), rel=1e-11)


class TestFinalIdentity:
    @pytest.mark.parametrize("x", range(2, 9))
    def test_single_mode_sweep(self, x):
        assert final_identity_check([2.0], x) <= 1e-10

    def test_mixed_tuple(self):
        assert final_identity_check([1.5, 2.5, 4.0], 5) <= 1e-9

    def test_product_form(self):
        assert renyi_product([2.0, 3.0], 2) == pytest.approx(1.0 / 6.0)


class TestSaddle:
    def test_residuals_scenario_one(self):
        rng = np.random.default_rng(0)
        for n in (2, 5, 8):
            lams = rng.uniform(1.001, 10.0, size=n)
            chat = constraint_block(lams)
            a0, b0 = saddle_point_solution(chat, n)
            r1, r2 = saddle_residuals(a0, b0, chat, n)
            assert max(r1, r2) <= 1e-10

    def test_residuals_scenario_two(self):
        rng = np.random.default_rng(1)
        spec = ConstraintSpec(
            windows=(tuple(rng.uniform(1.5, 9.0, 2)), tuple(rng.uniform(1.5, 9.0, 3)))
        )
        chat = constraint_block(spec.lambdas)
        a0, b0 = saddle_point_solution(chat, spec.n_modes)
        r1, r2 = saddle_residuals(a0, b0, chat, spec.n_modes, spec)
        assert max(r1, r2) <= 1e-10

    def test_symmetry_structure(self):
        chat = constraint_block([2.0, 3.0])
        a0, b0 = saddle_point_solution(chat, 2)
        np.testing.assert_allclose(a0, a0.T, atol=1e-12)
        np.testing.assert_allclose(b0, -b0.T, atol=1e-12)
        # multipliers are i * real symmetric and real antisymmetric
        assert np.max(np.abs(np.real(a0))) <= 1e-14
        assert np.max(np.abs(np.imag(b0))) == 0.0

    def test_block_diagonal_inheritance(self):
        chat = constraint_block([2.0, 3.0, 4.0])
        a0, b0 = saddle_point_solution(chat, 3)
        mask = np.kron(np.eye(3, dtype=bool), np.ones((2, 2), dtype=bool))
        assert np.max(np.abs(a0[~mask])) <= 1e-14
        assert np.max(np.abs(b0[~mask])) <= 1e-14

    def test_mean_field_covariance(self):
        chat = constraint_block([2.0, 3.0, 1.5, 4.0])
        a0, b0 = saddle_point_solution(chat, 4)
        for eps in (1e-6, 1e-8):
            dev = np.max(np.abs(a_tilde(a0, b0, eps) - 0.5 * chat))
            assert dev <= 10.0 * eps * np.max(chat) ** 2

    def test_unreachable_below_one(self):
        with pytest.raises(ValueError):
            saddle_point_solution(constraint_block([1.0, 2.0]), 2)
        with pytest.raises(ValueError):
            saddle_point_solution(constraint_block([0.9]), 1)

    def test_rejects_non_isotropic(self):
        with pytest.raises(ValueError):
            saddle_point_solution(np.diag([2.0, 3.0]), 1)


class TestPrefactor:
    def test_exact_values(self):
        assert prefactor_integral(5, 1) == pytest.approx(1.0 / 4.0, rel=1e-12)
        assert prefactor_integral(4, 2) == pytest.approx(1.0 / 6.0, rel=1e-12)
        assert prefactor_integral(6, 2) == pytest.approx(1.0 / 20.0, rel=1e-12)

    def test_degenerate_zero_modes_warns(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            assert prefactor_integral(5, 0) == 1.0
        assert len(caught) == 1

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            prefactor_integral(3, 3)
        with pytest.raises(ValueError):
            prefactor_integral_mc(3, 3)

    def test_monte_carlo_matches(self):
        est, sem = prefactor_integral_mc(4, 2, n_samples=400_000, seed=5)
        assert abs(est - 1.0 / 6.0) <= 3.0 * sem
        assert sem < 0.01

    def test_monte_carlo_deterministic(self):
        a = prefactor_integral_mc(4, 1, n_samples=50_000, seed=7)
        b = prefactor_integral_mc(4, 1, n_samples=50_000, seed=7)
        assert a == b
