"""Observation simulation and the MAP estimator Monte Carlo."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .geometry import ArrayGeometry, steering_vector
from .models import Conditional, Gaussian, PriorSpec, Uniform, Unconditional
from .parallel import ordered_map
from .scenario import Scenario

COARSE_STRIDE = 8
COARSE_CANDIDATES = 4


def _cn(rng: np.random.Generator, shape, var: float) -> np.ndarray:
    """Circular complex Gaussian with variance ``var`` (``var/2`` per component)."""
    scale = np.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_observations(
    geometry: ArrayGeometry,
    theta: Sequence[float],
    rng: np.random.Generator,
    snapshots: int,
    sigma_n2: float,
    sigma_s2: Optional[float] = None,
    waveform: Optional[np.ndarray] = None,
) -> np.ndarray:
    """``y(t) = a(theta) s(t) + n(t)`` stacked as an ``(M, T)`` matrix.

    Exactly one of ``sigma_s2`` (random source, zero allowed) and ``waveform``
    (known samples) must be given.
    """
    if (sigma_s2 is None) == (waveform is None):
        raise ValueError("give exactly one of sigma_s2 and waveform")
    a = steering_vector(geometry, theta)
    m = geometry.n_sensors
    if waveform is None:
        if sigma_s2 < 0:
            raise ValueError("sigma_s2 must be >= 0")
        src = _cn(rng, snapshots, sigma_s2)
    else:
        src = np.asarray(waveform, dtype=complex).reshape(-1)
        snapshots = src.size
    noise = _cn(rng, (m, snapshots), sigma_n2) if sigma_n2 > 0 else np.zeros((m, snapshots), complex)
    return np.outer(a, src) + noise


def simulate(
    scenario: Scenario,
    theta: Sequence[float],
    rng: np.random.Generator,
    model=None,
) -> np.ndarray:
    """Draw one ``(M, T)`` observation matrix for ``scenario`` at ``theta``.

    Args:
        scenario: Scenario supplying geometry and the default model.
        theta: True direction parameters.
        rng: Random generator.
        model: Optional model overriding ``scenario.model`` (e.g. at another SNR).
    """
    model = scenario.model if model is None else model
    if isinstance(model, Unconditional):
        return draw_observations(scenario.geometry, theta, rng, model.snapshots, model.sigma_n2, sigma_s2=model.sigma_s2)
    return draw_observations(scenario.geometry, theta, rng, model.snapshots, model.sigma_n2, waveform=model.waveform[:, 0])


# ---------------------------------------------------------------------------
# MAP estimator
# ---------------------------------------------------------------------------

def search_axis(entry, count: int) -> np.ndarray:
    """Uniform grid over a prior's support (mean +/- 5 sigma for Gaussians)."""
    if isinstance(entry, Uniform):
        return np.linspace(entry.a, entry.b, count)
    sd = np.sqrt(entry.sigma2)
    return np.linspace(entry.mu - 5 * sd, entry.mu + 5 * sd, count)


class _Objective:
    """Log-posterior up to a constant, evaluated on grid products."""

    def __init__(self, y: np.ndarray, geometry: ArrayGeometry, model, prior: PriorSpec) -> None:
        self.geometry = geometry
        self.prior = prior
        m, t = y.shape
        if isinstance(model, Unconditional):
            # sum_t |a^H y_t|^2 = a^H (Y Y^H) a; a Cholesky factor keeps the width <= M
            if t > m:
                cov = y @ y.conj().T
                try:
                    y = np.linalg.cholesky(cov)
                except np.linalg.LinAlgError:
                    pass
            self.cols = y
            self.scale = model.phi(m) / model.sigma_n2
            self.quadratic = True
        else:
            self.cols = (y @ model.waveform[:, 0].conj()).reshape(m, 1)
            self.scale = 2.0 / model.sigma_n2
            self.quadratic = False
        self.flat = prior.is_uniform

    def _phases(self, x: np.ndarray, coord: np.ndarray) -> np.ndarray:
        return np.exp(-2j * np.pi * np.outer(x, coord))

    def grid(self, axes: list[np.ndarray]) -> np.ndarray:
        """Objective on the product of ``axes`` (one or two parameters)."""
        g = self.geometry
        if len(axes) == 1:
            ex = self._phases(axes[0], g.dx)
            proj = ex @ self.cols
            val = np.sum(np.abs(proj) ** 2, axis=-1) if self.quadratic else proj[:, 0].real
        else:
            ex = self._phases(axes[0], g.dx)
            ey = self._phases(axes[1], g.dy)
            # (Nu, r, M) @ (M, Nv) -> (Nu, r, Nv)
            proj = (ex[:, None, :] * self.cols.T[None, :, :]) @ ey.T
            val = np.sum(np.abs(proj) ** 2, axis=1) if self.quadratic else proj[:, 0, :].real
        val = self.scale * val
        if not self.flat:
            lp = [e.logpdf(ax) for e, ax in zip(self.prior.entries, axes)]
            val = val + (lp[0] if len(axes) == 1 else lp[0][:, None] + lp[1][None, :])
        return val


def _parabolic_offset(left: float, mid: float, right: float) -> float:
    den = left - 2.0 * mid + right
    if not den < 0.0:
        return 0.0
    off = 0.5 * (left - right) / den
    return float(np.clip(off, -0.5, 0.5))


def map_estimate(
    y: np.ndarray,
    scenario: Scenario,
    search_grid: Optional[int] = None,
    model=None,
) -> np.ndarray:
    """Grid MAP estimate with one parabolic refinement step per parameter.

    One parameter: exhaustive search over ``search_grid`` points. Two
    parameters: the same lattice is searched coarse-to-fine (every
    ``COARSE_STRIDE``-th point first, then full resolution around the best
    coarse candidates).

    Args:
        y: ``(M, T)`` observations.
        scenario: Geometry, prior and default model.
        search_grid: Points per parameter; defaults to ``scenario.map_grid``.
        model: Optional model overriding ``scenario.model``.

    Returns:
        Estimated parameter vector.
    """
    model = scenario.model if model is None else model
    count = scenario.map_grid if search_grid is None else int(search_grid)
    if count < 2:
        raise ValueError("search grid needs at least 2 points")
    obj = _Objective(np.asarray(y, dtype=complex), scenario.geometry, model, scenario.prior)
    axes = [search_axis(e, count) for e in scenario.prior.entries]
    if scenario.q == 1:
        vals = obj.grid(axes)
        best = (int(np.argmax(vals)),)
    elif scenario.q == 2:
        best = _search_2d(obj, axes)
    else:
        raise ValueError("MAP search supports one or two parameters")
    est = np.empty(len(axes))
    for k, (ax, i) in enumerate(zip(axes, best)):
        est[k] = ax[i]
        if 0 < i < ax.size - 1:
            trio = []
            for j in (i - 1, i, i + 1):
                pts = [np.array([ax[j]]) if d == k else np.array([axes[d][best[d]]]) for d in range(len(axes))]
                trio.append(float(obj.grid(pts).reshape(-1)[0]))
            est[k] = ax[i] + _parabolic_offset(*trio) * (ax[i + 1] - ax[i])
    return est


def _search_2d(obj: _Objective, axes: list[np.ndarray]) -> tuple:
    nu, nv = axes[0].size, axes[1].size
    stride = COARSE_STRIDE if min(nu, nv) >= 8 * COARSE_STRIDE else 1
    iu = np.arange(0, nu, stride)
    iv = np.arange(0, nv, stride)
    coarse = obj.grid([axes[0][iu], axes[1][iv]])
    if stride == 1:
        flat = int(np.argmax(coarse))
        return divmod(flat, nv)
    order = np.argsort(-coarse, axis=None, kind="stable")[:COARSE_CANDIDATES]
    best_val, best = -np.inf, (0, 0)
    for flat in order:
        cu, cv = divmod(int(flat), iv.size)
        u0, v0 = iu[cu], iv[cv]
        wu = np.arange(max(u0 - stride, 0), min(u0 + stride, nu - 1) + 1)
        wv = np.arange(max(v0 - stride, 0), min(v0 + stride, nv - 1) + 1)
        fine = obj.grid([axes[0][wu], axes[1][wv]])
        j = int(np.argmax(fine))
        a, b = divmod(j, wv.size)
        cand = (int(wu[a]), int(wv[b]))
        val = fine[a, b]
        if val > best_val or (val == best_val and cand < best):
            best_val, best = val, cand
    return best


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialBatch:
    """Per-trial draws, estimates and squared errors at one SNR point."""

    snr_db: float
    thetas: np.ndarray
    estimates: np.ndarray
    sq_err: np.ndarray

    @property
    def trials(self) -> int:
        return int(self.sq_err.shape[0])

    @property
    def mse(self) -> np.ndarray:
        return self.sq_err.mean(axis=0)

    @property
    def stderr(self) -> np.ndarray:
        n = self.trials
        if n < 2:
            return np.full(self.sq_err.shape[1], np.nan)
        return self.sq_err.std(axis=0, ddof=1) / np.sqrt(n)


def trial_rng(seed: int, point: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial, derived from (seed, point, trial)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(point, trial)))


def _run_block(task) -> tuple:
    scenario, model, point, start, stop, grid = task
    q = scenario.q
    thetas = np.empty((stop - start, q))
    ests = np.empty((stop - start, q))
    for n, i in enumerate(range(start, stop)):
        rng = trial_rng(scenario.seed, point, i)
        th = scenario.prior.sample(rng)
        y = simulate(scenario, th, rng, model)
        thetas[n] = th
        ests[n] = map_estimate(y, scenario, grid, model)
    return thetas, ests


def run_trials(
    scenario: Scenario,
    snr_db: float,
    point: int = 0,
    trials: Optional[int] = None,
    workers: int = 1,
    search_grid: Optional[int] = None,
    block: int = 50,
) -> TrialBatch:
    """Monte Carlo at one SNR point; theta is drawn from the prior for each trial.

    The aggregate is identical for any ``workers`` because each trial owns
    its random stream.
    """
    trials = scenario.trials if trials is None else int(trials)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    model = scenario.model_at(snr_db)
    tasks = [
        (scenario, model, point, s, min(s + block, trials), search_grid)
        for s in range(0, trials, block)
    ]
    parts = ordered_map(_run_block, tasks, workers)
    thetas = np.concatenate([p[0] for p in parts])
    ests = np.concatenate([p[1] for p in parts])
    return TrialBatch(float(snr_db), thetas, ests, (ests - thetas) ** 2)


@dataclass(frozen=True)
class MseRow:
    """One row of an MSE sweep."""

    snr_db: float
    mse: np.ndarray
    stderr: np.ndarray
    wwb: np.ndarray
    trials: int
    seed: int
    elapsed: float


def mse_sweep(
    scenario: Scenario,
    trials: Optional[int] = None,
    workers: int = 1,
    bounds: Optional[Sequence] = None,
    search_grid: Optional[int] = None,
) -> list[MseRow]:
    """Empirical global MSE of the MAP estimator at every SNR point.

    Args:
        scenario: Scenario to run.
        trials: Overrides ``scenario.trials``.
        workers: Process count for trial blocks.
        bounds: Optional precomputed :class:`~wwbkit.optimizer.WwbResult` per
            SNR point; computed with the scenario's optimizer otherwise.
        search_grid: Overrides ``scenario.map_grid``.

    Returns:
        One :class:`MseRow` per SNR point, in sweep order.
    """
    from .sweep import bound_sweep

    trials = scenario.trials if trials is None else int(trials)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if bounds is None:
        bounds = bound_sweep(scenario, workers)
    rows = []
    for j, snr in enumerate(scenario.snr_db):
        t0 = time.perf_counter()
        batch = run_trials(scenario, snr, j, trials, workers, search_grid)
        rows.append(
            MseRow(snr, batch.mse, batch.stderr, bounds[j].diag, batch.trials, scenario.seed, time.perf_counter() - t0)
        )
    return rows
