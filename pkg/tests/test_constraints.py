import json
import math

import numpy as np
import pytest

from gausslab.constraints import (
    ConstraintSpec,
    HawkingModel,
    build_constraint_matrix,
    constraint_residual,
    hat_projection,
    hawking_constraints,
    hawking_mode_count,
    load_spec,
    save_spec,
    scenario_one,
    window_mask,
)
from gausslab.symplectic import covariance_from_symplectic, two_mode_squeezer


class TestSpecValidation:
    def test_scenario_detection(self):
        assert scenario_one([2.0, 3.0]).scenario == "I"
        assert ConstraintSpec(windows=((2.0, 2.0), (3.0,))).scenario == "II"

    def test_rejects_lambda_below_one(self):
        with pytest.raises(ValueError):
            scenario_one([0.99])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            ConstraintSpec(windows=())
        with pytest.raises(ValueError):
            ConstraintSpec(windows=((),))

    def test_mode_count_and_slices(self):
        spec = ConstraintSpec(windows=((2.0, 2.0), (3.0,)))
        assert spec.n_modes == 3
        assert spec.lambdas == (2.0, 2.0, 3.0)
        assert spec.window_slices() == [(0, 2), (2, 3)]


class TestBuildMatrix:
    def test_vacuum_marginal(self):
        np.testing.assert_array_equal(build_constraint_matrix(scenario_one([1.0])), np.eye(2))

    def test_direct_assembly(self):
        np.testing.assert_array_equal(
            build_constraint_matrix(scenario_one([3.0, 2.0])), np.diag([3.0, 3.0, 2.0, 2.0])
        )

    def test_scenario_two_zero_cross_blocks(self):
        spec = ConstraintSpec(windows=((2.0, 2.0), (3.0,)))
        chat = build_constraint_matrix(spec)
        assert chat.shape == (6, 6)
        np.testing.assert_array_equal(chat, np.diag([2.0, 2.0, 2.0, 2.0, 3.0, 3.0]))
        # the mask still covers the window cross blocks, so zeros there are
        # genuine constraints rather than ignored entries
        assert window_mask(spec)[0, 2]
        assert not window_mask(spec)[0, 4]


class TestHatProjection:
    def test_block_diagonal_unchanged(self):
        spec = scenario_one([2.0, 3.0])
        chat = build_constraint_matrix(spec)
        np.testing.assert_array_equal(hat_projection(chat, spec), chat)

    def test_scenario_one_keeps_mode_blocks_only(self):
        spec = scenario_one([1.0, 1.0])
        c = np.arange(16.0).reshape(4, 4)
        h = hat_projection(c, spec)
        np.testing.assert_array_equal(h[:2, :2], c[:2, :2])
        np.testing.assert_array_equal(h[:2, 2:], np.zeros((2, 2)))

    def test_idempotent(self):
        spec = ConstraintSpec(windows=((1.5, 2.0), (1.0,)))
        c = np.random.default_rng(0).normal(size=(6, 6))
        once = hat_projection(c, spec)
        np.testing.assert_array_equal(hat_projection(once, spec), once)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            hat_projection(np.eye(4), scenario_one([2.0, 2.0, 2.0]))


class TestResidual:
    def test_exact_match(self):
        spec = scenario_one([2.0, 3.0])
        chat = build_constraint_matrix(spec)
        assert constraint_residual(chat, chat, spec) == 0.0

    def test_two_mode_squeezed_satisfies_marginals(self):
        r = 0.8
        c = covariance_from_symplectic(two_mode_squeezer(r))
        lam = np.cosh(2 * r)
        spec = scenario_one([lam, lam])
        chat = build_constraint_matrix(spec)
        # cross-mode correlations sit outside the scenario I hat
        assert constraint_residual(c, chat, spec) <= 1e-12

    def test_vacuum_against_thermal_target(self):
        spec = scenario_one([2.0, 2.0])
        chat = build_constraint_matrix(spec)
        assert constraint_residual(np.eye(4), chat, spec) == pytest.approx(1.0)

    def test_shape_mismatch(self):
        spec = scenario_one([2.0])
        with pytest.raises(ValueError):
            constraint_residual(np.eye(2), np.eye(4), spec)


class TestHawkingModel:
    def test_mode_count_formula(self):
        assert hawking_mode_count(HawkingModel(initial_mass=2.0, k=1.0)) == pytest.approx(2.0)

    def test_quadratic_scaling(self):
        n1 = hawking_mode_count(HawkingModel(initial_mass=5.0, k=1.0))
        n2 = hawking_mode_count(HawkingModel(initial_mass=10.0, k=1.0))
        assert n2 == pytest.approx(4 * n1)

    def test_k_halves(self):
        n1 = hawking_mode_count(HawkingModel(initial_mass=5.0, k=1.0))
        n2 = hawking_mode_count(HawkingModel(initial_mass=5.0, k=2.0))
        assert n2 == pytest.approx(n1 / 2)

    def test_solar_mass_order_of_magnitude(self):
        from gausslab.constants import SOLAR_MASS_IN_PLANCK_UNITS

        count = hawking_mode_count(HawkingModel(initial_mass=SOLAR_MASS_IN_PLANCK_UNITS, k=1.0))
        assert 75.0 <= math.log10(count) <= 77.0

    def test_window_bookkeeping(self):
        model = HawkingModel(initial_mass=3.0, k=1.0)
        assert model.n_windows == 3
        assert model.window_mass(1) == pytest.approx(2.0)
        assert model.temperature(1) == pytest.approx(0.5)
        assert model.frequency_spacing(1) == pytest.approx(0.25)
        assert model.modes_in_window(0) == 3

    def test_validation(self):
        with pytest.raises(ValueError):
            HawkingModel(initial_mass=-1.0, k=1.0)
        with pytest.raises(ValueError):
            HawkingModel(initial_mass=1.0, k=0.0)


class TestHawkingConstraints:
    def test_two_window_toy(self):
        model = HawkingModel(initial_mass=3.0, k=1.0)
        spec = hawking_constraints(model, (0, 2))
        assert spec.scenario == "II"
        assert [len(w) for w in spec.windows] == [3, 2]
        assert spec.n_modes == 5
        # self-consistency: the spec's own matrix satisfies its constraints
        chat = build_constraint_matrix(spec)
        assert constraint_residual(chat, chat, spec) == 0.0

    def test_thermal_ladder(self):
        model = HawkingModel(initial_mass=4.0, k=1.0)
        spec = hawking_constraints(model)
        for window, mass in zip(spec.windows, (4.0, 3.0, 2.0, 1.0)):
            for j, lam in enumerate(window, start=1):
                assert lam == pytest.approx(math.exp(j / mass))
        assert all(lam >= 1.0 for lam in spec.lambdas)

    def test_high_frequency_unbounded(self):
        # occupation (lam - 1)/2 -> 0 as the thermal eigenvalue grows with j
        model = HawkingModel(initial_mass=2.0, k=1.0)
        spec = hawking_constraints(model)
        lams = spec.windows[0]
        assert list(lams) == sorted(lams)

    def test_coth_form(self):
        model = HawkingModel(initial_mass=3.0, k=1.0)
        spec = hawking_constraints(model, (0, 1), form="coth")
        expected = 1.0 / math.tanh(0.5 * 1 / 3.0)
        assert spec.windows[0][0] == pytest.approx(expected)

    def test_empty_range_rejected(self):
        model = HawkingModel(initial_mass=3.0, k=1.0)
        with pytest.raises(ValueError):
            hawking_constraints(model, (2, 2))
        with pytest.raises(ValueError):
            hawking_constraints(model, (0, 99))


class TestSpecFiles:
    def test_roundtrip(self, tmp_path):
        spec = ConstraintSpec(windows=((2.0, 1.7), (2.5,)))
        path = tmp_path / "spec.json"
        save_spec(spec, path)
        assert load_spec(path) == spec
        doc = json.loads(path.read_text())
        assert doc["format_version"] == 1
        assert doc["scenario"] == "II"

    def test_version_check(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"format_version": 99, "windows": [[2.0]]}))
        with pytest.raises(ValueError):
            load_spec(path)

    def test_scenario_mismatch(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(
            json.dumps({"format_version": 1, "scenario": "II", "windows": [[2.0], [3.0]]})
        )
        with pytest.raises(ValueError):
            load_spec(path)

    def test_hawking_preset(self, tmp_path):
        path = tmp_path / "hawking.json"
        path.write_text(
            json.dumps(
                {
                    "format_version": 1,
                    "hawking": {"mass_planck_units": 3.0, "k": 1.0, "window_range": [0, 2]},
                }
            )
        )
        spec = load_spec(path)
        assert [len(w) for w in spec.windows] == [3, 2]
