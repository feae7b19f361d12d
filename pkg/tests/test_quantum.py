import math

import numpy as np
import pytest

from entbell import (
    JointDistribution,
    NoisyStateParams,
    NumericalCorruptionError,
    PhaseSettings,
    joint_distribution,
    make_state,
    marginal,
)

from conftest import random_settings


def diagonal_settings(dim: int = 3) -> PhaseSettings:
    return PhaseSettings.diagonal(dim)


class TestNoisyStateParams:
    @pytest.mark.parametrize("beta,vis", [(-0.1, 0.5), (1.1, 0.5), (0.5, -0.1), (0.5, 1.5)])
    def test_out_of_range_rejected(self, beta, vis):
        with pytest.raises(ValueError):
            NoisyStateParams(beta=beta, visibility=vis)

    def test_unsupported_dim_rejected(self):
        with pytest.raises(ValueError):
            NoisyStateParams(dim=4)

    def test_schmidt_coefficients(self):
        c = NoisyStateParams(beta=0.5).schmidt_coefficients()
        assert np.allclose(c, np.array([1.0, 1.0, 0.5]) / math.sqrt(2.25))
        c2 = NoisyStateParams(beta=0.3, dim=2).schmidt_coefficients()
        assert np.allclose(c2, np.array([1.0, 1.0]) / math.sqrt(2.0))


class TestMakeState:
    def test_maximally_entangled_pure(self):
        rho = make_state(NoisyStateParams(beta=1.0, visibility=1.0))
        psi = np.zeros(9)
        psi[[0, 4, 8]] = 1.0 / math.sqrt(3.0)
        assert np.abs(rho - np.outer(psi, psi)).max() < 1e-15

    def test_zero_visibility_is_white_noise(self):
        rho = make_state(NoisyStateParams(beta=0.7, visibility=0.0))
        assert np.abs(rho - np.eye(9) / 9.0).max() < 1e-15

    def test_beta_zero_has_no_third_mode_support(self):
        rho = make_state(NoisyStateParams(beta=0.0, visibility=1.0))
        psi = np.zeros(9)
        psi[[0, 4]] = 1.0 / math.sqrt(2.0)
        assert np.abs(rho - np.outer(psi, psi)).max() < 1e-15
        third_mode = [2, 5, 6, 7, 8]  # any index pair touching mode 3
        assert np.abs(rho[third_mode, :]).max() == 0.0
        assert np.abs(rho[:, third_mode]).max() == 0.0

    def test_density_matrix_properties(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            params = NoisyStateParams(beta=rng.uniform(), visibility=rng.uniform())
            rho = make_state(params)
            assert abs(np.trace(rho).real - 1.0) < 1e-12
            assert np.abs(rho - rho.conj().T).max() < 1e-12
            assert np.linalg.eigvalsh(rho).min() > -1e-12

    def test_qubit_noise_weight(self):
        rho = make_state(NoisyStateParams(visibility=0.0, dim=2))
        assert np.allclose(rho, np.eye(4) / 4.0)


class TestJointDistribution:
    def test_type_validates_negative(self):
        t = np.full((3, 3), 1.0 / 9.0)
        t[0, 0] = -1e-6
        t[2, 2] += 1e-6
        with pytest.raises(ValueError):
            JointDistribution(table=t)

    def test_type_validates_sum(self):
        with pytest.raises(ValueError):
            JointDistribution(table=np.full((3, 3), 0.2))

    def test_tiny_negative_clipped(self):
        t = np.full((3, 3), 1.0 / 9.0)
        t[0, 0] -= 1e-13
        jd = JointDistribution(table=t + 1e-13 / 9)
        assert jd.table.min() >= 0.0

    def test_white_noise_uniform(self):
        rng = np.random.default_rng(2)
        rho = np.eye(9) / 9.0
        jd = joint_distribution(rho, random_settings(rng, 3), random_settings(rng, 3))
        assert np.abs(jd.table - 1.0 / 9.0).max() < 1e-12

    def test_correlated_state_diagonal_settings(self):
        rho = make_state(NoisyStateParams(beta=1.0, visibility=1.0))
        s = diagonal_settings()
        jd = joint_distribution(rho, s, s)
        assert np.abs(jd.table - np.eye(3) / 3.0).max() < 1e-12

    def test_beta_zero_diagonal_settings(self):
        rho = make_state(NoisyStateParams(beta=0.0, visibility=1.0))
        s = diagonal_settings()
        jd = joint_distribution(rho, s, s)
        expected = np.zeros((3, 3))
        expected[0, 0] = expected[1, 1] = 0.5
        assert np.abs(jd.table - expected).max() < 1e-12

    def test_dimension_mismatch_rejected(self):
        rho = np.eye(9) / 9.0
        with pytest.raises(ValueError):
            joint_distribution(rho, diagonal_settings(2), diagonal_settings(2))

    def test_corrupt_state_detected(self):
        rho = np.diag([1.5, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).astype(complex)
        s = diagonal_settings()
        with pytest.raises(NumericalCorruptionError):
            joint_distribution(rho, s, s)

    def test_normalized(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            rho = make_state(NoisyStateParams(beta=rng.uniform(), visibility=rng.uniform()))
            jd = joint_distribution(rho, random_settings(rng, 3), random_settings(rng, 3))
            assert abs(jd.table.sum() - 1.0) < 1e-10
            assert jd.table.min() >= 0.0


class TestMarginal:
    def test_uniform(self):
        jd = JointDistribution(table=np.full((3, 3), 1.0 / 9.0))
        assert np.allclose(marginal(jd, "A"), np.ones(3) / 3.0)
        assert np.allclose(marginal(jd, "B"), np.ones(3) / 3.0)

    def test_correlated(self):
        jd = JointDistribution(table=np.eye(3) / 3.0)
        assert np.allclose(marginal(jd, "A"), np.ones(3) / 3.0)
        assert np.allclose(marginal(jd, "B"), np.ones(3) / 3.0)

    def test_sums_to_one(self):
        rng = np.random.default_rng(5)
        t = rng.dirichlet(np.ones(9)).reshape(3, 3)
        jd = JointDistribution(table=t)
        assert abs(marginal(jd, "A").sum() - 1.0) < 1e-10
        assert abs(marginal(jd, "B").sum() - 1.0) < 1e-10

    def test_bad_party_rejected(self):
        jd = JointDistribution(table=np.full((3, 3), 1.0 / 9.0))
        with pytest.raises(ValueError):
            marginal(jd, "C")


class TestStatisticalInvariants:
    def test_no_signaling(self):
        rng = np.random.default_rng(7)
        params = NoisyStateParams(beta=0.5, visibility=0.7)
        rho = make_state(params)
        s_a = random_settings(rng, 3)
        s_b1 = random_settings(rng, 3)
        s_b2 = random_settings(rng, 3)
        m_a1 = marginal(joint_distribution(rho, s_a, s_b1), "A")
        m_a2 = marginal(joint_distribution(rho, s_a, s_b2), "A")
        assert np.abs(m_a1 - m_a2).max() < 1e-12
        s_a2 = random_settings(rng, 3)
        m_b1 = marginal(joint_distribution(rho, s_a, s_b1), "B")
        m_b2 = marginal(joint_distribution(rho, s_a2, s_b1), "B")
        assert np.abs(m_b1 - m_b2).max() < 1e-12

    def test_alpha_invariance(self):
        rng = np.random.default_rng(11)
        rho = make_state(NoisyStateParams(beta=0.8, visibility=0.9))
        for _ in range(10):
            pairs_a = [tuple(rng.uniform(0, 2 * math.pi, 2)) for _ in range(3)]
            pairs_b = [tuple(rng.uniform(0, 2 * math.pi, 2)) for _ in range(3)]
            base = joint_distribution(
                rho,
                PhaseSettings.from_pairs(3, pairs_a),
                PhaseSettings.from_pairs(3, pairs_b),
            )
            shifted = joint_distribution(
                rho,
                PhaseSettings.from_pairs(3, pairs_a, alphas=tuple(rng.uniform(0, 2 * math.pi, 3))),
                PhaseSettings.from_pairs(3, pairs_b, alphas=tuple(rng.uniform(0, 2 * math.pi, 3))),
            )
            assert np.abs(base.table - shifted.table).max() < 1e-12

    def test_mixing_linearity(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            beta = rng.uniform()
            vis = rng.uniform()
            s_a = random_settings(rng, 3)
            s_b = random_settings(rng, 3)
            mixed = joint_distribution(
                make_state(NoisyStateParams(beta=beta, visibility=vis)), s_a, s_b
            )
            pure = joint_distribution(
                make_state(NoisyStateParams(beta=beta, visibility=1.0)), s_a, s_b
            )
            expected = vis * pure.table + (1.0 - vis) / 9.0
            assert np.abs(mixed.table - expected).max() < 1e-12
