"""Brute-force reference computations used to check the closed forms.

Nothing here shares code paths with :mod:`wwbkit.general` or
:mod:`wwbkit.closed_form` beyond geometry and covariance construction.
"""

from __future__ import annotations

from typing import Callable, Sequence, Union

import numpy as np

from .geometry import ArrayGeometry, steering_matrix
from .models import Conditional, Gaussian, PriorSpec, Uniform, Unconditional, observation_covariance


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit-variance circular complex Gaussian draws."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)


def _loglik_uncond(y: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Log-likelihood (up to a theta-free constant) of snapshots ``y`` of shape (n, T, M)."""
    sign, logdet = np.linalg.slogdet(cov)
    inv = np.linalg.inv(cov)
    quad = np.einsum("ntm,mk,ntk->n", y.conj(), inv, y).real
    return -y.shape[1] * logdet - quad


def _loglik_cond(y: np.ndarray, mean: np.ndarray, sigma_n2: float) -> np.ndarray:
    """Log-likelihood (up to a constant) with mean ``mean`` of shape (T, M)."""
    r = y - mean[None]
    return -np.sum(np.abs(r) ** 2, axis=(1, 2)) / sigma_n2


def mc_eta_prime(
    args,
    theta: Sequence[float],
    geometry: ArrayGeometry,
    model,
    samples: int,
    rng: np.random.Generator,
    n_sources: int = 1,
    block: int = 200_000,
) -> tuple[float, float]:
    """Importance-sampling estimate of ``eta'``.

    Draws ``Y ~ p(.; theta)`` and averages
    ``(p(Y; theta+u)/p(Y; theta))^alpha (p(Y; theta+v)/p(Y; theta))^beta``.

    Args:
        args: :class:`~wwbkit.general.EtaArgs`.
        theta: Reference parameters.
        geometry: Sensor layout.
        model: Unconditional or conditional model.
        samples: Number of draws (at least 10^4).
        rng: Random generator.
        n_sources: Sources sharing ``theta`` (unconditional model).
        block: Draws processed per vectorized batch.

    Returns:
        ``(estimate, standard_error)``.
    """
    if samples < 10_000:
        raise ValueError("samples must be >= 1e4")
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    thu, thv = th + args.u, th + args.v
    m = geometry.n_sensors
    t = model.snapshots
    total = 0.0
    total_sq = 0.0
    done = 0
    if isinstance(model, Unconditional):
        covs = [observation_covariance(geometry, model, x, n_sources) for x in (th, thu, thv)]
        chol = np.linalg.cholesky(covs[0])
    elif isinstance(model, Conditional):
        means = [(steering_matrix(geometry, x, model.n_sources) @ model.waveform.T).T for x in (th, thu, thv)]
    else:
        raise TypeError(f"unsupported model {model!r}")
    while done < samples:
        n = min(block, samples - done)
        z = _complex_normal(rng, (n, t, m))
        if isinstance(model, Unconditional):
            y = z @ chol.T
            l0, lu, lv = (_loglik_uncond(y, c) for c in covs)
        else:
            y = means[0][None] + np.sqrt(model.sigma_n2) * z
            l0, lu, lv = (_loglik_cond(y, mu, model.sigma_n2) for mu in means)
        w = np.exp(args.alpha * (lu - l0) + args.beta * (lv - l0))
        total += float(np.sum(w))
        total_sq += float(np.sum(w * w))
        done += n
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return mean, float(np.sqrt(var / samples))


def dense_det_combo(
    geometry: ArrayGeometry,
    model: Unconditional,
    weights: Sequence[float],
    thetas: Sequence[Sequence[float]],
) -> tuple[float, float]:
    """Determinant of ``sum_k w_k R^-1(theta_k)`` from explicit matrices.

    Returns:
        ``(log|det|, sign)``.
    """
    if len(weights) != len(thetas) or not 1 <= len(weights) <= 3:
        raise ValueError("need one to three (weight, theta) pairs")
    if abs(sum(weights) - 1.0) > 1e-12:
        raise ValueError("weights must sum to 1")
    acc = 0.0
    for w, th in zip(weights, thetas):
        acc = acc + w * np.linalg.inv(observation_covariance(geometry, model, th))
    sign, logdet = np.linalg.slogdet(acc)
    # the combination is Hermitian, so the complex phase is rounding noise
    return float(logdet), float(np.sign(sign.real))


def _interval(entry, uk: float, vk: float, span_sigmas: float):
    if isinstance(entry, Uniform):
        lo = max(entry.a, entry.a - uk, entry.a - vk)
        hi = min(entry.b, entry.b - uk, entry.b - vk)
        return lo, hi
    sd = np.sqrt(entry.sigma2)
    reach = max(abs(uk), abs(vk))
    return entry.mu - span_sigmas * sd - reach, entry.mu + span_sigmas * sd + reach


def _weight_log(entry, x: np.ndarray, uk: float, vk: float, al: float, be: float) -> np.ndarray:
    # the region already enforces the support, so the logs are finite
    return al * entry.logpdf(x + uk) + be * entry.logpdf(x + vk) + (1.0 - al - be) * entry.logpdf(x)


def quadrature_eta(
    eta_prime: Union[float, Callable[[np.ndarray], np.ndarray]],
    prior: PriorSpec,
    args,
    nodes: int | None = None,
    span_sigmas: float = 10.0,
) -> float:
    """Composite-trapezoid integral of ``eta'(theta)`` times the prior ratio.

    Integrates ``eta'(theta) p^a(theta+u) p^b(theta+v) p^(1-a-b)(theta)``
    over the region where all three densities are supported. Gaussian
    coordinates are truncated at ``span_sigmas`` standard deviations.

    A constant ``eta_prime`` makes the integrand a product over coordinates,
    so each coordinate is integrated on its own with ``nodes`` points.

    Args:
        eta_prime: A constant, or a vectorized callable mapping an ``(n, q)``
            array to ``(n,)``.
        prior: One or two prior entries.
        args: :class:`~wwbkit.general.EtaArgs`.
        nodes: Nodes per dimension; defaults to 10^5, except 2001 for a
            callable in 2-D.
        span_sigmas: Gaussian truncation half-width.

    Returns:
        ``eta``; 0 for an empty region.
    """
    q = len(prior)
    if q not in (1, 2):
        raise ValueError("quadrature oracle supports one or two parameters")
    separable = not callable(eta_prime)
    if nodes is None:
        nodes = 100_000 if q == 1 or separable else 2001
    al, be = args.alpha, args.beta
    axes = []
    for k, e in enumerate(prior.entries):
        lo, hi = _interval(e, float(args.u[k]), float(args.v[k]), span_sigmas)
        if hi <= lo:
            return 0.0
        axes.append(np.linspace(lo, hi, nodes))
    if separable:
        total = float(eta_prime)
        for k, e in enumerate(prior.entries):
            w = np.exp(_weight_log(e, axes[k], float(args.u[k]), float(args.v[k]), al, be))
            total *= float(np.trapezoid(w, axes[k]))
        return total
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.reshape(-1) for g in mesh], axis=-1)
    logw = np.zeros(pts.shape[0])
    for k, e in enumerate(prior.entries):
        logw += _weight_log(e, pts[:, k], float(args.u[k]), float(args.v[k]), al, be)
    vals = np.asarray(eta_prime(pts), dtype=float) * np.exp(logw)
    vals = vals.reshape([nodes] * q)
    for k in reversed(range(q)):
        vals = np.trapezoid(vals, axes[k], axis=k)
    return float(vals)
