import numpy as np
import pytest

from wwbkit.bench import draw_observations, map_estimate, mse_sweep, run_trials, search_axis, simulate, trial_rng
from wwbkit.geometry import uca, ula
from wwbkit.models import Conditional, Gaussian, PriorSpec, Unconditional, constant_waveform, observation_covariance
from wwbkit.parallel import ENV_WORKERS, ordered_map, resolve_workers
from wwbkit.scenario import Scenario
from wwbkit.sweep import bound_sweep, scenario_bound


def _scenario(geometry, model, q, **kw):
    return Scenario(geometry, model, PriorSpec.unit_uniform(q), np.zeros(q), kw.pop("snr_db", (0.0,)), **kw)


def _loglik_uncond(y, geometry, model, theta):
    r = observation_covariance(geometry, model, theta)
    sign, logdet = np.linalg.slogdet(r)
    quad = np.einsum("it,ij,jt->", y.conj(), np.linalg.inv(r), y).real
    return -y.shape[1] * logdet - quad


class TestSimulation:
    def test_noise_statistics(self, rng):
        y = draw_observations(ula(4), [0.0], rng, 20000, 2.0, sigma_s2=0.0)
        np.testing.assert_allclose(np.mean(np.abs(y) ** 2), 2.0, rtol=0.02)

    def test_noiseless_conditional(self, rng):
        y = draw_observations(ula(3), [0.25], rng, 2, 0.0, waveform=np.array([1.0, 1j]))
        a = np.exp(2j * np.pi * 0.5 * np.arange(3) * 0.25)
        np.testing.assert_allclose(y, np.outer(a, [1.0, 1j]))

    def test_exactly_one_source_spec(self, rng):
        with pytest.raises(ValueError):
            draw_observations(ula(3), [0.0], rng, 2, 1.0)

    def test_trial_streams_independent_of_order(self):
        a = trial_rng(5, 1, 3).standard_normal(4)
        trial_rng(5, 1, 2).standard_normal(4)
        np.testing.assert_array_equal(a, trial_rng(5, 1, 3).standard_normal(4))
        assert not np.array_equal(a, trial_rng(5, 2, 3).standard_normal(4))


class TestMapEstimate:
    def test_noiseless_grid_point(self):
        sc = _scenario(uca(8), Conditional(constant_waveform(4), 1.0), 2)
        ax = search_axis(sc.prior[0], sc.map_grid)
        th0 = np.array([ax[700], ax[1500]])
        y = draw_observations(sc.geometry, th0, np.random.default_rng(0), 4, 0.0, waveform=constant_waveform(4))
        # the parabolic step may move the exact peak by rounding noise only
        np.testing.assert_allclose(map_estimate(y, sc), th0, rtol=0, atol=1e-12)

    def test_equals_grid_ml_1d(self, rng):
        # flat prior: the MAP grid winner is the full-likelihood grid winner
        g = ula(5)
        m = Unconditional(1.0, 1.0, 6).with_snr_db(-3)
        sc = _scenario(g, m, 1, map_grid=101)
        ax = search_axis(sc.prior[0], 101)
        for _ in range(10):
            y = simulate(sc, [rng.uniform(-1, 1)], rng)
            ll = [_loglik_uncond(y, g, m, [x]) for x in ax]
            est = map_estimate(y, sc)[0]
            assert abs(est - ax[int(np.argmax(ll))]) <= 0.5 * (ax[1] - ax[0]) + 1e-12

    def test_equals_grid_ml_2d(self, rng):
        g = uca(5)
        m = Unconditional(1.0, 1.0, 4).with_snr_db(0)
        sc = _scenario(g, m, 2, map_grid=31)
        ax = search_axis(sc.prior[0], 31)
        for _ in range(3):
            y = simulate(sc, rng.uniform(-0.8, 0.8, 2), rng)
            ll = np.array([[_loglik_uncond(y, g, m, [a, b]) for b in ax] for a in ax])
            iu, iv = np.unravel_index(np.argmax(ll), ll.shape)
            est = map_estimate(y, sc)
            np.testing.assert_allclose(est, [ax[iu], ax[iv]], atol=0.5 * (ax[1] - ax[0]) + 1e-12)

    def test_high_snr_uca16(self):
        sc = _scenario(uca(16), Unconditional(1e4, 1.0, 100), 2, seed=11)
        cell = 2.0 / (sc.map_grid - 1)
        hits = 0
        for i in range(200):
            rng = trial_rng(11, 0, i)
            th = sc.prior.sample(rng)
            est = map_estimate(simulate(sc, th, rng), sc)
            hits += bool(np.all(np.abs(est - th) <= cell))
        assert hits >= 198

    def test_informative_prior_dominates_at_zero_snr(self, rng):
        prior = PriorSpec((Gaussian(0.3, 0.01),))
        sc = Scenario(ula(4), Unconditional(1e-9, 1.0, 2), prior, [0.3], (0.0,))
        est = map_estimate(simulate(sc, [0.3], rng), sc)
        assert abs(est[0] - 0.3) < 0.01


class TestMonteCarlo:
    def test_worker_count_does_not_change_results(self):
        sc = _scenario(ula(6), Conditional(constant_waveform(5)), 1, seed=9, map_grid=256)
        a = run_trials(sc, -5.0, 0, 30, workers=1, block=7)
        b = run_trials(sc, -5.0, 0, 30, workers=3, block=7)
        np.testing.assert_array_equal(a.estimates, b.estimates)
        np.testing.assert_array_equal(a.thetas, b.thetas)

    def test_zero_trials_rejected(self):
        sc = _scenario(ula(4), Conditional(constant_waveform(2)), 1)
        with pytest.raises(ValueError):
            run_trials(sc, 0.0, trials=0)
        with pytest.raises(ValueError):
            mse_sweep(sc, trials=0)

    def test_no_information_mse(self):
        # estimates and truths independent and uniform on [-1, 1]: E(x - y)^2 = 2/3
        sc = _scenario(ula(6), Unconditional(1.0, 1.0, 5), 1, seed=4, map_grid=512, snr_db=(-60.0,))
        (row,) = mse_sweep(sc, trials=400)
        assert abs(row.mse[0] - 2 / 3) < 4 * row.stderr[0]

    def test_endfire_swaps_carry_high_snr_bound(self):
        # half-wavelength ULA: u near +1 and u near -1 give almost the same data,
        # so rare swaps of size ~2 keep the MSE above the bound's floor
        sc = _scenario(ula(8), Conditional(constant_waveform(10)), 1, seed=21, map_grid=512, snr_db=(5.0,))
        (row,) = mse_sweep(sc, trials=6000)
        assert row.mse[0] >= row.wwb[0]
        assert row.wwb[0] > 5e-4

    def test_rows_pair_with_bound(self):
        sc = _scenario(ula(8), Unconditional(1.0, 1.0, 10), 1, seed=1, map_grid=512, snr_db=(-20.0, 5.0))
        rows = mse_sweep(sc, trials=100)
        bounds = bound_sweep(sc)
        for r, b in zip(rows, bounds):
            np.testing.assert_array_equal(r.wwb, b.diag)
            assert r.trials == 100 and r.seed == 1


class TestSweepAndParallel:
    def test_bound_sweep_order_and_workers(self):
        sc = _scenario(ula(6), Conditional(constant_waveform(4)), 1, snr_db=(-20.0, -10.0, 0.0))
        one = bound_sweep(sc, workers=1)
        two = bound_sweep(sc, workers=2)
        assert [r.objective for r in one] == [r.objective for r in two]
        assert one[1].objective == scenario_bound(sc, -10.0).objective
        assert one[0].objective > one[1].objective > one[2].objective

    def test_ordered_map(self):
        assert ordered_map(abs, [-3, 2, -1], workers=2) == [3, 2, 1]

    def test_resolve_workers(self, monkeypatch):
        monkeypatch.setenv(ENV_WORKERS, "3")
        assert resolve_workers(None) == 3
        assert resolve_workers(2) == 2
        monkeypatch.setenv(ENV_WORKERS, "zero")
        with pytest.raises(ValueError):
            resolve_workers(None)
        with pytest.raises(ValueError):
            resolve_workers(0)
