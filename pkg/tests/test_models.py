import numpy as np
import pytest

from wwbkit.geometry import uca, ula, steering_vector
from wwbkit.models import (
    Conditional,
    Gaussian,
    PriorSpec,
    Unconditional,
    Uniform,
    constant_waveform,
    observation_covariance,
    observation_mean,
)


class TestUnconditional:
    def test_snr_functionals(self):
        m = Unconditional(2.0, 0.5, 10)
        assert m.snr == pytest.approx(4.0)
        assert m.u_snr(8) == pytest.approx(4.0 / (0.5 * (16.0 + 0.5)))
        assert m.phi(8) == pytest.approx(2.0 / 16.5)

    def test_with_snr_db(self):
        m = Unconditional(1.0, 2.0, 5).with_snr_db(10.0)
        assert m.sigma_s2 == pytest.approx(20.0)
        assert m.sigma_n2 == 2.0 and m.snapshots == 5

    @pytest.mark.parametrize("kwargs", [dict(sigma_s2=0.0), dict(sigma_s2=1.0, sigma_n2=-1.0), dict(sigma_s2=1.0, snapshots=0)])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            Unconditional(**kwargs)

    def test_covariance_structure(self):
        g = uca(6)
        m = Unconditional(2.0, 0.7)
        r = observation_covariance(g, m, [0.2, -0.3])
        a = steering_vector(g, [0.2, -0.3])
        np.testing.assert_allclose(r, 2.0 * np.outer(a, a.conj()) + 0.7 * np.eye(6), atol=1e-14)
        np.testing.assert_allclose(r, r.conj().T)


class TestConditional:
    def test_snr_and_c_snr(self):
        m = Conditional(constant_waveform(20), 1.0).with_snr_db(-3.0)
        assert m.snr == pytest.approx(10 ** -0.3)
        assert m.c_snr() == pytest.approx(20 * 10 ** -0.3)

    def test_waveform_read_only(self):
        m = Conditional(constant_waveform(3))
        with pytest.raises(ValueError):
            m.waveform[0, 0] = 2.0

    def test_multi_source_shape(self):
        m = Conditional(np.ones((4, 2)))
        assert (m.snapshots, m.n_sources) == (4, 2)

    def test_zero_energy_rejected(self):
        with pytest.raises(ValueError):
            Conditional(np.zeros(3))

    def test_mean(self):
        g = ula(4)
        m = Conditional(np.array([1.0, 2.0j]))
        mu = observation_mean(g, m, [0.3])
        a = steering_vector(g, [0.3])
        np.testing.assert_allclose(mu, np.outer(a, [1.0, 2.0j]))

    def test_equality(self):
        assert Conditional(constant_waveform(3)) == Conditional(constant_waveform(3))
        assert Conditional(constant_waveform(3)) != Conditional(constant_waveform(4))


class TestPriors:
    def test_uniform(self, rng):
        p = Uniform(-1.0, 3.0)
        assert p.length == 4.0
        assert p.contains(3.0) and not p.contains(3.1)
        x = p.sample(rng, 1000)
        assert x.min() >= -1.0 and x.max() <= 3.0

    def test_gaussian_logpdf(self):
        p = Gaussian(0.5, 0.25)
        np.testing.assert_allclose(p.logpdf(0.5), -0.5 * np.log(2 * np.pi * 0.25))

    def test_spec(self):
        spec = PriorSpec.unit_uniform(2)
        assert spec.is_uniform and spec.is_unit_uniform()
        assert spec.logpdf([0.0, 0.0]) == pytest.approx(2 * np.log(0.5))
        assert not PriorSpec((Uniform(-1, 1), Gaussian(0, 1))).is_uniform

    def test_empty_spec_rejected(self):
        with pytest.raises(ValueError):
            PriorSpec(())
