import numpy as np
import pytest

from wwbkit.general import EtaArgs, det_combo3, eta_prime_cov, eta_prime_mean, log_det_cov, log_prior_factor
from wwbkit.geometry import ArrayGeometry, uca
from wwbkit.models import Conditional, Gaussian, PriorSpec, Unconditional, Uniform
from wwbkit.oracle import dense_det_combo, mc_eta_prime, quadrature_eta


class TestMonteCarloEta:
    def test_zero_displacement_exact(self, rng):
        a = EtaArgs(0.3, 0.4, np.zeros(2), np.zeros(2))
        est, se = mc_eta_prime(a, [0.1, 0.1], uca(3), Unconditional(1.0), 10_000, rng)
        assert est == 1.0 and se == 0.0

    def test_brackets_unconditional(self, rng):
        g = ArrayGeometry(np.array([[0.0, 0.0], [0.5, 0.2]]))
        m = Unconditional(0.9, 1.0, 1)
        a = EtaArgs(0.2, 0.15, np.array([0.3, 0.0]), np.array([0.0, -0.25]))
        est, se = mc_eta_prime(a, [0.1, -0.2], g, m, 200_000, rng)
        assert abs(est - eta_prime_cov(a, [0.1, -0.2], g, m)) <= 3 * se
        assert se < 0.01 * est

    def test_brackets_conditional(self, rng):
        g = ArrayGeometry(np.array([[0.0, 0.0], [0.4, -0.3]]))
        m = Conditional(np.array([0.8 + 0.3j]), 1.0)
        a = EtaArgs(0.2, 0.2, np.array([0.35, 0.0]), np.array([0.2, 0.0]))
        est, se = mc_eta_prime(a, [0.0, 0.2], g, m, 200_000, rng)
        assert abs(est - eta_prime_mean(a, [0.0, 0.2], g, m)) <= 3 * se

    def test_requires_enough_samples(self, rng):
        a = EtaArgs(0.5, 0.5, np.zeros(1), np.zeros(1))
        with pytest.raises(ValueError):
            mc_eta_prime(a, [0.0], uca(3), Unconditional(1.0), 100, rng)


class TestDenseDeterminant:
    def test_single_term(self, rng):
        g = uca(4)
        m = Unconditional(2.0, 0.5)
        th = rng.uniform(-1, 1, 2)
        ld, sg = dense_det_combo(g, m, [1.0], [th])
        np.testing.assert_allclose(ld, -log_det_cov(g, m, th), rtol=1e-12)
        assert sg == 1.0

    def test_permutation_invariant(self, rng):
        g = uca(4)
        m = Unconditional(1.0)
        t = [rng.uniform(-1, 1, 2) for _ in range(3)]
        w = [0.5, 0.8, -0.3]
        a = dense_det_combo(g, m, w, t)
        b = dense_det_combo(g, m, w[::-1], t[::-1])
        np.testing.assert_allclose(a, b, rtol=1e-12)
        np.testing.assert_allclose(a, det_combo3(g, m, *w, *t), rtol=1e-10)

    def test_weights_checked(self):
        with pytest.raises(ValueError):
            dense_det_combo(uca(3), Unconditional(1.0), [0.5, 0.2], [[0, 0], [0.1, 0]])


class TestQuadrature:
    def test_uniform_lengths(self):
        prior = PriorSpec((Uniform(-1.0, 1.0),))
        a = EtaArgs(0.5, 0.5, np.array([0.6]), np.array([-0.3]))
        val = quadrature_eta(lambda th: np.full(th.shape[0], 0.7), prior, a)
        np.testing.assert_allclose(val, 0.7 * (2.0 - 0.9) / 2.0, rtol=1e-10)

    def test_gaussian_factor(self):
        prior = PriorSpec((Gaussian(0.1, 0.09),))
        a = EtaArgs(0.25, 0.5, np.array([0.2]), np.array([-0.3]))
        val = quadrature_eta(lambda th: np.ones(th.shape[0]), prior, a)
        np.testing.assert_allclose(val, np.exp(log_prior_factor(prior, a)), rtol=1e-8)

    def test_empty_region(self):
        a = EtaArgs(0.5, 0.5, np.array([1.5]), np.array([-1.0]))
        assert quadrature_eta(lambda th: np.ones(th.shape[0]), PriorSpec.unit_uniform(1), a) == 0.0
