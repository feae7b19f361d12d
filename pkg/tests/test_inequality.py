import itertools
import math

import numpy as np
import pytest

from entbell import (
    DistanceKind,
    NoisyStateParams,
    PhaseSettings,
    QuadrangleSettings,
    evaluate_chsh_covariance,
    evaluate_quadrangle,
    make_state,
    shannon,
    tensor_product,
    tsallis,
)

from conftest import random_density, random_settings

TSIRELSON_MIN = 2.0 - 2.0 * math.sqrt(2.0)


def quad(rng, dim=3) -> QuadrangleSettings:
    return QuadrangleSettings(*(random_settings(rng, dim) for _ in range(4)))


def qubit_setting(omega: float) -> PhaseSettings:
    return PhaseSettings.from_pairs(2, [(0.0, omega)])


def chsh_closed_form(a: float, b: float, ap: float, bp: float) -> float:
    """Correlator sum for planar qubit measurements on the correlated pair.

    For phi = 0 settings the two-outcome correlator of the maximally
    entangled state is cos(2(omega_A - omega_B)); this closed form is the
    independent oracle for the quantum optimum.
    """
    return (
        math.cos(2 * (a - b))
        + math.cos(2 * (b - ap))
        + math.cos(2 * (ap - bp))
        - math.cos(2 * (a - bp))
    )


class TestEvaluateQuadrangle:
    def test_white_noise_value(self):
        # uniform joints: every distance is 2 ln 3, so R - L = 4 ln 3
        rng = np.random.default_rng(1)
        rho = make_state(NoisyStateParams(beta=1.0, visibility=0.0))
        rep = evaluate_quadrangle(rho, quad(rng), DistanceKind.D1, shannon())
        for dist in rep.distances():
            assert dist == pytest.approx(2 * math.log(3.0), abs=1e-12)
        assert rep.violation == pytest.approx(4 * math.log(3.0), abs=1e-12)
        assert not rep.violated

    def test_identical_diagonal_settings_all_zero(self):
        rho = make_state(NoisyStateParams(beta=1.0, visibility=1.0))
        s = PhaseSettings.diagonal(3)
        rep = evaluate_quadrangle(
            rho, QuadrangleSettings(s, s, s, s), DistanceKind.D1, shannon()
        )
        for dist in rep.distances():
            assert dist == pytest.approx(0.0, abs=1e-12)
        assert rep.violation == pytest.approx(0.0, abs=1e-12)

    def test_report_accounting(self):
        rng = np.random.default_rng(2)
        rho = make_state(NoisyStateParams(beta=0.6, visibility=0.8))
        rep = evaluate_quadrangle(rho, quad(rng), DistanceKind.D2, tsallis(2.0))
        assert rep.rhs == pytest.approx(
            rep.d_ab + rep.d_ba_prime + rep.d_a_prime_b_prime, abs=0.0
        )
        assert rep.lhs == rep.d_ab_prime
        assert rep.violation == pytest.approx(rep.rhs - rep.lhs, abs=0.0)
        assert all(d >= 0.0 for d in rep.distances())

    def test_exchange_symmetry_multiset(self):
        # swapping A <-> A' together with B <-> B' permutes which pair sits
        # on the left side but keeps the same four cross-party distances
        rng = np.random.default_rng(3)
        rho = make_state(NoisyStateParams(beta=0.7, visibility=0.9))
        a, ap, b, bp = (random_settings(rng, 3) for _ in range(4))
        rep1 = evaluate_quadrangle(
            rho, QuadrangleSettings(a, ap, b, bp), DistanceKind.D1, shannon()
        )
        rep2 = evaluate_quadrangle(
            rho, QuadrangleSettings(ap, a, bp, b), DistanceKind.D1, shannon()
        )
        assert sorted(rep1.distances()) == pytest.approx(sorted(rep2.distances()), abs=1e-12)

    def test_v0_settings_independent(self):
        rng = np.random.default_rng(5)
        rho = make_state(NoisyStateParams(beta=0.4, visibility=0.0))
        values = [
            evaluate_quadrangle(rho, quad(rng), DistanceKind.D1, shannon()).violation
            for _ in range(100)
        ]
        assert max(values) - min(values) < 1e-10

    def test_dimension_guard(self):
        rng = np.random.default_rng(7)
        rho = make_state(NoisyStateParams(beta=1.0, visibility=1.0))  # 9x9
        with pytest.raises(ValueError):
            evaluate_quadrangle(rho, quad(rng, dim=2), DistanceKind.D1, shannon())

    def test_covariance_needs_qubits(self):
        rng = np.random.default_rng(9)
        rho = make_state(NoisyStateParams(beta=1.0, visibility=1.0))
        with pytest.raises(ValueError):
            evaluate_quadrangle(rho, quad(rng), DistanceKind.COVARIANCE, shannon())

    def test_mixed_dimension_settings_rejected(self):
        rng = np.random.default_rng(11)
        with pytest.raises(ValueError):
            QuadrangleSettings(
                random_settings(rng, 3),
                random_settings(rng, 3),
                random_settings(rng, 2),
                random_settings(rng, 3),
            )


class TestSeparableStatesNeverViolate:
    def test_product_states(self):
        rng = np.random.default_rng(13)
        for dkind, ekind in [
            (DistanceKind.D1, shannon()),
            (DistanceKind.D2_NORM, tsallis(2.0)),
        ]:
            for _ in range(20):
                rho = tensor_product(random_density(rng, 3), random_density(rng, 3))
                rep = evaluate_quadrangle(rho, quad(rng), dkind, ekind)
                assert rep.violation >= -1e-9

    def test_mixtures_of_products(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            weights = rng.dirichlet(np.ones(3))
            rho = sum(
                w * tensor_product(random_density(rng, 3), random_density(rng, 3))
                for w in weights
            )
            rep = evaluate_quadrangle(rho, quad(rng), DistanceKind.D1, tsallis(3.0))
            assert rep.violation >= -1e-9

    def test_below_threshold_visibility(self):
        rng = np.random.default_rng(19)
        rho = make_state(NoisyStateParams(beta=1.0, visibility=0.3))
        for _ in range(20):
            rep = evaluate_quadrangle(rho, quad(rng), DistanceKind.D1, shannon())
            assert rep.violation >= -1e-9

    def test_product_qubit_state_covariance(self):
        rng = np.random.default_rng(23)
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0] = 1.0  # |00><00|
        for _ in range(20):
            rep = evaluate_chsh_covariance(rho, quad(rng, dim=2))
            assert rep.violation >= -1e-9


class TestChshCovariance:
    def test_tsirelson_point(self):
        # grid oracle over planar angles confirms the analytic optimum
        grid = np.linspace(0.0, math.pi, 121)
        best = max(
            chsh_closed_form(0.0, b, ap, bp)
            for b, ap, bp in itertools.product(grid, repeat=3)
        )
        assert abs(best - 2.0 * math.sqrt(2.0)) < 1e-3

        rho = make_state(NoisyStateParams(visibility=1.0, dim=2))
        settings = QuadrangleSettings(
            qubit_setting(0.0),
            qubit_setting(math.pi / 4),
            qubit_setting(math.pi / 8),
            qubit_setting(3 * math.pi / 8),
        )
        rep = evaluate_chsh_covariance(rho, settings)
        assert rep.violation == pytest.approx(TSIRELSON_MIN, abs=1e-12)

    def test_violation_is_two_minus_chsh(self):
        rng = np.random.default_rng(29)
        rho = make_state(NoisyStateParams(visibility=1.0, dim=2))
        for _ in range(20):
            a, ap, b, bp = rng.uniform(0.0, 2 * math.pi, 4)
            settings = QuadrangleSettings(
                qubit_setting(a), qubit_setting(ap), qubit_setting(b), qubit_setting(bp)
            )
            rep = evaluate_chsh_covariance(rho, settings)
            chsh = chsh_closed_form(a, b, ap, bp)
            assert rep.violation == pytest.approx(2.0 - chsh, abs=1e-12)

    def test_maximally_mixed_all_ones(self):
        rng = np.random.default_rng(31)
        rho = np.eye(4, dtype=complex) / 4.0
        rep = evaluate_chsh_covariance(rho, quad(rng, dim=2))
        for dist in rep.distances():
            assert dist == pytest.approx(1.0, abs=1e-12)
        assert rep.violation == pytest.approx(2.0, abs=1e-12)

    def test_qutrit_state_rejected(self):
        rng = np.random.default_rng(37)
        rho = make_state(NoisyStateParams())
        with pytest.raises(ValueError):
            evaluate_chsh_covariance(rho, quad(rng, dim=2))
