"""Identity verification suites.

Each suite runs a fixed grid of numerical identity checks and reports the
worst residual against a named tolerance.  The suites need no sampling and
run in seconds to a minute; they are the repository's primary regression
gate (exposed through the command line as `gausslab verify`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fock, replica
from .constraints import ConstraintSpec, scenario_one
from .entropy import (
    entropy_mixed,
    entropy_single,
    renyi_trace_continued,
    renyi_trace_mixed,
    renyi_trace_single,
)
from .symplectic import (
    build_omega,
    covariance_from_symplectic,
    random_symplectic,
    restrict,
    symplectic_spectrum,
    two_mode_squeezer,
)

SUITE_NAMES = ("replica", "saddle", "fock", "analytic")

# sweep shared by the replica identity checks
MU_GRID = (1.0 + 1e-6, 1.5, 2.0, 5.0, 10.0)
X_GRID = tuple(range(2, 9))


@dataclass
class CheckResult:
    name: str
    residual: float
    tolerance: float
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "detail": self.detail,
        }


def _tol(overrides: dict | None, name: str, default: float) -> float:
    if overrides and name in overrides:
        return float(overrides[name])
    return default


def _mu_tuples():
    """Deterministic grid of subsystem eigenvalue tuples, sizes 1 to 3."""
    tuples = [(mu,) for mu in MU_GRID]
    tuples += [
        (MU_GRID[0], MU_GRID[1]),
        (2.0, 5.0),
        (5.0, 10.0),
        (1.5, 2.0, 5.0),
        (MU_GRID[0], 2.0, 10.0),
        (10.0, 10.0, 10.0),
    ]
    return tuples


def replica_suite(overrides: dict | None = None) -> list[CheckResult]:
    checks = []

    worst, worst_at = 0.0, None
    for x in X_GRID:
        for mus in _mu_tuples():
            err = replica.final_identity_check(mus, x)
            if err > worst:
                worst, worst_at = err, {"x": x, "mu": list(mus)}
    checks.append(
        CheckResult(
            "replica_master_vs_product",
            worst,
            _tol(overrides, "replica_master_vs_product", 1e-9),
            {"worst_at": worst_at, "x_grid": list(X_GRID), "mu_grid": list(MU_GRID)},
        )
    )

    worst = 0.0
    for x in range(3, 9):
        for mu in MU_GRID:
            if mu <= 1.0:
                continue
            closed = replica.toeplitz_cofactor(mu, x)
            direct = replica.toeplitz_cofactor_direct(mu, x)
            worst = max(worst, abs(closed - direct) / abs(direct))
    checks.append(
        CheckResult(
            "toeplitz_closed_vs_direct",
            worst,
            _tol(overrides, "toeplitz_closed_vs_direct", 1e-10),
        )
    )

    worst = 0.0
    for x in X_GRID:
        for mu in MU_GRID:
            final = replica.delta_j(mu, x)
            inter = replica.delta_j_intermediate(mu, x)
            worst = max(worst, abs(final - inter) / abs(final))
    checks.append(
        CheckResult(
            "delta_final_vs_cofactor_route",
            worst,
            _tol(overrides, "delta_final_vs_cofactor_route", 1e-10),
        )
    )

    worst = 0
    for x in range(2, 13):
        t = replica.build_replica_matrices(x).t
        power = np.linalg.matrix_power(t, x - 1) + np.eye(x - 1, dtype=int)
        worst = max(worst, int(np.max(np.abs(power))))
    checks.append(
        CheckResult(
            "shift_antiperiodicity",
            float(worst),
            _tol(overrides, "shift_antiperiodicity", 0.0),
        )
    )

    worst = 0.0
    det_worst = 0.0
    for x in range(3, 13):
        worst = max(worst, replica.j_geometric_identity_check(x))
        t = replica.build_replica_matrices(x).t
        det_worst = max(det_worst, abs(np.linalg.det(np.eye(x - 1) - t) - 2.0))
    checks.append(
        CheckResult(
            "phase_matrix_geometric_identity",
            worst,
            _tol(overrides, "phase_matrix_geometric_identity", 1e-12),
        )
    )
    checks.append(
        CheckResult(
            "det_one_minus_shift_equals_two",
            det_worst,
            _tol(overrides, "det_one_minus_shift_equals_two", 1e-9),
        )
    )
    return checks


def _random_specs(rng: np.random.Generator, lam_range=(1.0 + 1e-3, 10.0)):
    """A few random scenario I and II specs with N <= 8."""
    specs = []
    for n in (2, 4, 8):
        lams = rng.uniform(*lam_range, size=n)
        specs.append(scenario_one(lams))
    specs.append(
        ConstraintSpec(
            windows=(
                tuple(rng.uniform(*lam_range, size=2)),
                tuple(rng.uniform(*lam_range, size=3)),
                tuple(rng.uniform(*lam_range, size=1)),
            )
        )
    )
    return specs


def saddle_suite(overrides: dict | None = None, seed: int = 11) -> list[CheckResult]:
    checks = []
    rng = np.random.default_rng(seed)

    worst = 0.0
    for spec in _random_specs(rng):
        chat = replica.constraint_block(spec.lambdas)
        a0, b0 = replica.saddle_point_solution(chat, spec.n_modes)
        r1, r2 = replica.saddle_residuals(a0, b0, chat, spec.n_modes, spec)
        worst = max(worst, r1, r2)
    checks.append(
        CheckResult(
            "saddle_stationarity",
            worst,
            _tol(overrides, "saddle_stationarity", 1e-10),
        )
    )

    # moderate eigenvalues keep the O(eps) coefficient 2(lam^2-1)/N^2 below 10
    eps = 1e-8
    worst = 0.0
    ratios = []
    for spec in _random_specs(rng, lam_range=(1.5, 5.0)):
        n = spec.n_modes
        if n < 4:
            continue
        chat = replica.constraint_block(spec.lambdas)
        a0, b0 = replica.saddle_point_solution(chat, n)
        devs = {}
        for e in (1e-6, eps):
            at = replica.a_tilde(a0, b0, e)
            devs[e] = float(np.max(np.abs(at - (2.0 / n) * chat)))
        worst = max(worst, devs[eps] / eps)
        ratios.append(devs[1e-6] / devs[eps])
    checks.append(
        CheckResult(
            "saddle_mean_field_covariance",
            worst,
            _tol(overrides, "saddle_mean_field_covariance", 10.0),
            {
                "units": "deviation / eps at eps = 1e-8",
                "eps_sweep_ratio_1e-6_over_1e-8": ratios,
            },
        )
    )

    worst = 0.0
    details = []
    for n_total, n_a in ((4, 1), (4, 2), (6, 2)):
        exact = replica.prefactor_integral(n_total, n_a)
        est, sem = replica.prefactor_integral_mc(n_total, n_a, seed=seed + n_total + n_a)
        sigmas = abs(est - exact) / sem
        worst = max(worst, sigmas)
        details.append(
            {"N": n_total, "N_A": n_a, "exact": exact, "estimate": est, "stderr": sem}
        )
    checks.append(
        CheckResult(
            "radial_prefactor_monte_carlo",
            worst,
            _tol(overrides, "radial_prefactor_monte_carlo", 3.0),
            {"units": "standard errors", "cases": details},
        )
    )
    return checks


def fock_suite(overrides: dict | None = None, seed: int = 5) -> list[CheckResult]:
    checks = []
    rng = np.random.default_rng(seed)

    worst = 0.0
    for lam in (1.0, 1.5, 2.0, 3.0, 5.0):
        rho = fock.thermal_state(lam)
        for x in range(2, 7):
            direct = fock.trace_power(rho, x)
            closed = renyi_trace_single(lam, x)
            worst = max(worst, abs(direct - closed))
    checks.append(
        CheckResult(
            "thermal_trace_powers", worst, _tol(overrides, "thermal_trace_powers", 1e-8)
        )
    )

    worst = 0.0
    for trial in range(20):
        if trial < 12:
            s = random_symplectic(2, squeeze_bound=0.7, seed=rng)
            c_a = restrict(covariance_from_symplectic(s), [0])
        else:
            s = random_symplectic(3, squeeze_bound=0.6, seed=rng)
            c_a = restrict(covariance_from_symplectic(s), [0, 1])
        quad = fock.purity_by_quadrature(c_a)
        exact = 1.0 / np.sqrt(np.linalg.det(c_a))
        worst = max(worst, abs(quad - exact))
    checks.append(
        CheckResult(
            "purity_by_quadrature", worst, _tol(overrides, "purity_by_quadrature", 1e-6)
        )
    )

    worst = 0.0
    for r1, r2 in (((0.3, -0.2), (0.1, 0.4)), ((0.5, 0.1), (-0.3, 0.2))):
        worst = max(worst, fock.displacement_group_law_residual(r1, r2, cutoff=40))
    checks.append(
        CheckResult(
            "displacement_group_law",
            worst,
            _tol(overrides, "displacement_group_law", 1e-6),
        )
    )

    worst = 0.0
    rho = fock.thermal_state(2.0, cutoff=60)
    for r in ((0.0, 0.0), (0.7, 0.3), (-0.5, 1.0)):
        gaussian = fock.characteristic_function(2.0 * np.eye(2), r)
        direct = fock.char_function_fock(rho, np.array(r))
        worst = max(worst, abs(direct - gaussian))
    checks.append(
        CheckResult(
            "characteristic_function_match",
            worst,
            _tol(overrides, "characteristic_function_match", 1e-6),
        )
    )

    val = fock.coherent_rep_trace(2.0 * np.eye(2), x=3)
    checks.append(
        CheckResult(
            "coherent_replica_trace_x3",
            abs(val - 4.0 / 13.0),
            _tol(overrides, "coherent_replica_trace_x3", 1e-5),
            {"value": val, "target": 4.0 / 13.0},
        )
    )
    return checks


def analytic_suite(overrides: dict | None = None, seed: int = 7) -> list[CheckResult]:
    checks = []
    rng = np.random.default_rng(seed)

    # entropy equals -d/dx Tr rho^x at x = 1 (central difference on the
    # analytic continuation)
    worst = 0.0
    h = 1e-4
    for lam in (1.1, 2.0, 3.0, 10.0):
        deriv = (renyi_trace_continued(lam, 1.0 + h) - renyi_trace_continued(lam, 1.0 - h)) / (
            2.0 * h
        )
        worst = max(worst, abs(-deriv - entropy_single(lam)))
    checks.append(
        CheckResult(
            "entropy_from_renyi_derivative",
            worst,
            _tol(overrides, "entropy_from_renyi_derivative", 1e-6),
        )
    )

    worst = 0.0
    for trial in range(10):
        n = 2 + trial % 3
        s = random_symplectic(n, squeeze_bound=0.8, seed=rng)
        c = covariance_from_symplectic(s)
        c_a = restrict(c, list(range(1 + trial % n)))
        purity = renyi_trace_mixed(c_a, 2)
        exact = 1.0 / np.sqrt(np.linalg.det(c_a))
        worst = max(worst, abs(purity - exact) / exact)
    checks.append(
        CheckResult(
            "purity_determinant_identity",
            worst,
            _tol(overrides, "purity_determinant_identity", 1e-10),
        )
    )

    worst = 0.0
    for lams in ((1.5, 2.0, 3.0), (1.0, 4.0), (2.5, 2.5, 2.5, 7.0)):
        block = replica.constraint_block(lams)
        total = entropy_mixed(block)
        parts = sum(entropy_single(lam) for lam in lams)
        worst = max(worst, abs(total - parts))
    checks.append(
        CheckResult(
            "entropy_additivity", worst, _tol(overrides, "entropy_additivity", 1e-12)
        )
    )

    # one-mode reduction of a two-mode squeezed state is thermal at cosh(2r)
    worst = 0.0
    for r in (0.4, 1.0):
        c = covariance_from_symplectic(two_mode_squeezer(r))
        nu = symplectic_spectrum(restrict(c, [0]))[0]
        worst = max(worst, abs(nu - np.cosh(2.0 * r)))
        worst = max(
            worst, abs(entropy_mixed(restrict(c, [0])) - entropy_single(np.cosh(2.0 * r)))
        )
    checks.append(
        CheckResult(
            "two_mode_squeezed_marginal",
            worst,
            _tol(overrides, "two_mode_squeezed_marginal", 1e-10),
        )
    )
    return checks


def run_suites(suite: str = "all", overrides: dict | None = None, seed: int = 0) -> dict:
    """Run the requested suite(s) and return a JSON-ready report."""
    if suite == "all":
        names = SUITE_NAMES
    elif suite in SUITE_NAMES:
        names = (suite,)
    else:
        raise ValueError(f"unknown suite {suite!r}; choose from {('all',) + SUITE_NAMES}")
    runners = {
        "replica": lambda: replica_suite(overrides),
        "saddle": lambda: saddle_suite(overrides, seed=seed + 11),
        "fock": lambda: fock_suite(overrides, seed=seed + 5),
        "analytic": lambda: analytic_suite(overrides, seed=seed + 7),
    }
    report = {"suites": {}, "passed": True}
    for name in names:
        checks = runners[name]()
        report["suites"][name] = [c.as_dict() for c in checks]
        report["passed"] = report["passed"] and all(c.passed for c in checks)
    return report
