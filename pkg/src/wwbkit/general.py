"""Model-agnostic machinery for the Weiss-Weinstein bound.

Every G element is a combination of the function

    eta(alpha, beta, u, v) = E_theta[ eta'_theta(alpha, beta, u, v) * prior ratio ]

where ``eta'`` only involves the likelihood. This module provides ``eta'``
for the covariance-parameterized (unconditional) and mean-parameterized
(conditional) Gaussian models, the rank-structured determinant lemmas used by
the former, the ``zeta`` distances used by the latter, prior integration and
the assembly of G entries. All ``eta`` values are carried as natural logs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .geometry import ArrayGeometry, steering_matrix, steering_vector
from .models import (
    Conditional,
    Gaussian,
    PriorSpec,
    Uniform,
    Unconditional,
    observation_covariance,
)

WEIGHT_TOL = 1e-12


class InvalidRegionError(ValueError):
    """The (alpha, beta, u, v) point makes the combined inverse covariance indefinite."""


class DegenerateGError(ValueError):
    """A G element denominator vanished."""


@dataclass(frozen=True)
class EtaArgs:
    """Arguments of ``eta`` and ``eta'``.

    Args:
        alpha: Exponent of the likelihood at ``theta + u``.
        beta: Exponent of the likelihood at ``theta + v``.
        u: Displacement vector with q entries.
        v: Displacement vector with q entries.
    """

    alpha: float
    beta: float
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        u = np.atleast_1d(np.asarray(self.u, dtype=float)).copy()
        v = np.atleast_1d(np.asarray(self.v, dtype=float)).copy()
        if u.shape != v.shape or u.ndim != 1:
            raise ValueError("u and v must be vectors of equal length")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise ValueError("u and v must be finite")
        for name, val in (("alpha", self.alpha), ("beta", self.beta)):
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {val}")
        u.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def q(self) -> int:
        return int(self.u.size)

    def swapped(self) -> "EtaArgs":
        return EtaArgs(self.beta, self.alpha, self.v, self.u)


@dataclass(frozen=True)
class GMatrix:
    """The q x q matrix G together with the (h, s) point it was built at."""

    entries: np.ndarray
    h: np.ndarray
    s: np.ndarray

    def __post_init__(self) -> None:
        g = np.atleast_2d(np.asarray(self.entries, dtype=float)).copy()
        h = np.atleast_1d(np.asarray(self.h, dtype=float)).copy()
        s = np.atleast_1d(np.asarray(self.s, dtype=float)).copy()
        q = h.size
        if g.shape != (q, q) or s.size != q:
            raise ValueError("G, h and s dimensions disagree")
        if not np.all(np.isfinite(g)):
            raise ValueError("G entries must be finite")
        if not np.array_equal(g, g.T):
            raise ValueError("G must be symmetric")
        if np.any(h == 0.0):
            raise ValueError("test points must be non-zero")
        if np.any((s <= 0.0) | (s >= 1.0)):
            raise ValueError("s values must lie in (0, 1)")
        for arr in (g, h, s):
            arr.setflags(write=False)
        object.__setattr__(self, "entries", g)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "s", s)

    @property
    def q(self) -> int:
        return int(self.h.size)


# ---------------------------------------------------------------------------
# Determinant lemmas (single source, white noise)
# ---------------------------------------------------------------------------

def log_det_cov(geometry: ArrayGeometry, model: Unconditional, theta: Sequence[float]) -> float:
    """log |R_y(theta)| = M log sigma_n2 + log(1 + (sigma_s2 / sigma_n2) ||a||^2)."""
    a = steering_vector(geometry, theta)
    norm2 = float(np.vdot(a, a).real)
    m = geometry.n_sensors
    return m * np.log(model.sigma_n2) + np.log1p(model.sigma_s2 / model.sigma_n2 * norm2)


def _check_weights(weights: Sequence[float]) -> None:
    total = float(sum(weights))
    if abs(total - 1.0) > WEIGHT_TOL:
        raise ValueError(f"weights must sum to 1 (got {total!r})")


def det_combo2(
    geometry: ArrayGeometry,
    model: Unconditional,
    m1: float,
    m2: float,
    theta1: Sequence[float],
    theta2: Sequence[float],
) -> tuple[float, float]:
    """Determinant of ``m1 R^-1(theta1) + m2 R^-1(theta2)`` from the rank-one lemma.

    Args:
        geometry: Sensor layout.
        model: Single-source unconditional model.
        m1: First weight.
        m2: Second weight, ``m1 + m2 = 1``.
        theta1: First direction.
        theta2: Second direction.

    Returns:
        ``(log|det|, sign)``.
    """
    _check_weights((m1, m2))
    a1 = steering_vector(geometry, theta1)
    a2 = steering_vector(geometry, theta2)
    n1 = float(np.vdot(a1, a1).real)
    n2 = float(np.vdot(a2, a2).real)
    g12 = np.vdot(a1, a2)
    s2, sn2 = model.sigma_s2, model.sigma_n2
    x1 = m1 * s2 / (s2 * n1 + sn2)
    x2 = m2 * s2 / (s2 * n2 + sn2)
    core = 1.0 - x1 * n1 - x2 * n2 - x1 * x2 * (abs(g12) ** 2 - n1 * n2)
    return _log_sign(core, geometry.n_sensors, sn2)


def det_combo3(
    geometry: ArrayGeometry,
    model: Unconditional,
    m1: float,
    m2: float,
    m3: float,
    theta1: Sequence[float],
    theta2: Sequence[float],
    theta3: Sequence[float],
) -> tuple[float, float]:
    """Determinant of ``sum_k m_k R^-1(theta_k)`` for three directions.

    Includes the triple-product correction
    ``a3^H a2 a1^H a3 a2^H a1`` plus its conjugate-ordered partner.

    Returns:
        ``(log|det|, sign)``.
    """
    _check_weights((m1, m2, m3))
    a = [steering_vector(geometry, t) for t in (theta1, theta2, theta3)]
    n = [float(np.vdot(x, x).real) for x in a]
    g12 = np.vdot(a[0], a[1])
    g13 = np.vdot(a[0], a[2])
    g23 = np.vdot(a[1], a[2])
    s2, sn2 = model.sigma_s2, model.sigma_n2
    x = [mk * s2 / (s2 * nk + sn2) for mk, nk in zip((m1, m2, m3), n)]
    single = x[0] * n[0] + x[1] * n[1] + x[2] * n[2]
    pairs = (
        x[0] * x[1] * (abs(g12) ** 2 - n[0] * n[1])
        + x[0] * x[2] * (abs(g13) ** 2 - n[0] * n[2])
        + x[1] * x[2] * (abs(g23) ** 2 - n[1] * n[2])
    )
    # a3^H a2 . a1^H a3 . a2^H a1 and its conjugate
    trip = np.conj(g23) * g13 * np.conj(g12)
    triple = (
        n[0] * n[1] * n[2]
        - (abs(g12) ** 2 * n[2] + abs(g13) ** 2 * n[1] + abs(g23) ** 2 * n[0])
        + 2.0 * trip.real
    )
    core = 1.0 - single - pairs - x[0] * x[1] * x[2] * triple
    return _log_sign(core, geometry.n_sensors, sn2)


def _log_sign(core: float, m: int, sigma_n2: float) -> tuple[float, float]:
    if core == 0.0:
        return -np.inf, 0.0
    return float(np.log(abs(core)) - m * np.log(sigma_n2)), float(np.sign(core))


# ---------------------------------------------------------------------------
# eta' for the unconditional model
# ---------------------------------------------------------------------------

def _chol_logdet(mat: np.ndarray) -> Optional[float]:
    try:
        c = np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        return None
    return float(2.0 * np.sum(np.log(np.diag(c).real)))


def log_eta_prime_cov(
    args: EtaArgs,
    theta: Sequence[float],
    geometry: ArrayGeometry,
    model: Unconditional,
    n_sources: int = 1,
    method: str = "auto",
) -> float:
    """Natural log of ``eta'`` for the unconditional Gaussian model.

    Args:
        args: Exponents and displacements.
        theta: Reference parameter vector.
        geometry: Sensor layout.
        model: Unconditional model.
        n_sources: Number of sources sharing ``theta``.
        method: ``"lemma"`` (single source only), ``"dense"`` or ``"auto"``.

    Returns:
        ``log eta'``.

    Raises:
        InvalidRegionError: The combined inverse covariance is not positive definite.
    """
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    if th.size != args.q:
        raise ValueError("theta and displacement dimensions disagree")
    if method == "auto":
        method = "lemma" if n_sources == 1 else "dense"
    al, be = args.alpha, args.beta
    c = al + be - 1.0
    t = model.snapshots
    thu, thv = th + args.u, th + args.v
    if method == "lemma":
        if n_sources != 1:
            raise ValueError("the determinant lemmas cover one source only")
        ld0 = log_det_cov(geometry, model, th)
        ldu = log_det_cov(geometry, model, thu)
        ldv = log_det_cov(geometry, model, thv)
        ldc, sign = det_combo3(geometry, model, al, be, -c, thu, thv, th)
        if sign <= 0:
            raise InvalidRegionError(f"combined inverse covariance is indefinite at {args}")
    elif method == "dense":
        r0 = observation_covariance(geometry, model, th, n_sources)
        ru = observation_covariance(geometry, model, thu, n_sources)
        rv = observation_covariance(geometry, model, thv, n_sources)
        ld0, ldu, ldv = (_chol_logdet(r) for r in (r0, ru, rv))
        comb = al * np.linalg.inv(ru) + be * np.linalg.inv(rv) - c * np.linalg.inv(r0)
        comb = 0.5 * (comb + comb.conj().T)
        ldc = _chol_logdet(comb)
        if ldc is None:
            raise InvalidRegionError(f"combined inverse covariance is indefinite at {args}")
    else:
        raise ValueError(f"unknown method {method!r}")
    return t * (c * ld0 - al * ldu - be * ldv - ldc)


def eta_prime_cov(args: EtaArgs, theta, geometry, model, n_sources: int = 1, method: str = "auto") -> float:
    """``exp`` of :func:`log_eta_prime_cov`."""
    return float(np.exp(log_eta_prime_cov(args, theta, geometry, model, n_sources, method)))


# ---------------------------------------------------------------------------
# zeta and eta' for the conditional model
# ---------------------------------------------------------------------------

def _single_nonzero(vec: np.ndarray, name: str) -> Optional[int]:
    nz = np.flatnonzero(vec)
    if nz.size > 1:
        raise ValueError(f"{name} may have at most one non-zero entry")
    return int(nz[0]) if nz.size else None


def _noise_inv(model: Conditional, m: int, noise_cov: Optional[np.ndarray]):
    """Return a function x -> R_n^-1 x."""
    if noise_cov is None:
        return lambda x: x / model.sigma_n2
    rn = np.asarray(noise_cov, dtype=complex)
    if rn.shape != (m, m):
        raise ValueError("noise covariance must be M x M")
    c = np.linalg.cholesky(rn)

    def solve(x):
        return np.linalg.solve(c.conj().T, np.linalg.solve(c, x))

    return solve


def zeta(
    geometry: ArrayGeometry,
    model: Conditional,
    theta: Sequence[float],
    mu: Sequence[float],
    rho: Sequence[float],
    noise_cov: Optional[np.ndarray] = None,
) -> float:
    """Noise-whitened distance ``sum_t ||R_n^-1/2 (A(theta+mu) - A(theta+rho)) s(t)||^2``.

    ``mu`` and ``rho`` each move at most one parameter. When both moved
    parameters belong to the same source (or one displacement is zero) the
    result only involves that source; otherwise the cross-source form is used.

    Args:
        geometry: Sensor layout.
        model: Conditional model; its waveform has one column per source.
        theta: Concatenated source parameters.
        mu: First displacement.
        rho: Second displacement.
        noise_cov: Optional M x M noise covariance; defaults to ``sigma_n2 I``.

    Returns:
        Non-negative real value.
    """
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    if not (th.shape == mu.shape == rho.shape):
        raise ValueError("theta, mu and rho must have equal length")
    n_src = model.n_sources
    if th.size % n_src:
        raise ValueError("theta length must be a multiple of the number of sources")
    p = th.size // n_src
    i_mu = _single_nonzero(mu, "mu")
    i_rho = _single_nonzero(rho, "rho")
    if i_mu is None and i_rho is None:
        return 0.0
    src_mu = None if i_mu is None else i_mu // p
    src_rho = None if i_rho is None else i_rho // p
    wave = model.waveform
    m = geometry.n_sensors
    white = noise_cov is None

    def block(vec, src):
        return vec[src * p:(src + 1) * p]

    if src_mu is None or src_rho is None or src_mu == src_rho:
        src = src_mu if src_mu is not None else src_rho
        energy = float(np.sum(np.abs(wave[:, src]) ** 2))
        if white:
            # theta-independent form: sum_i |e^{-j2pi r_i.mu} - e^{-j2pi r_i.rho}|^2 / sigma_n2
            d = steering_vector(geometry, -block(mu, src)) - steering_vector(geometry, -block(rho, src))
            return float(np.sum(np.abs(d) ** 2).real) / model.sigma_n2 * energy
        solve = _noise_inv(model, m, noise_cov)
        tb = block(th, src)
        d = steering_vector(geometry, tb + block(mu, src)) - steering_vector(geometry, tb + block(rho, src))
        return float(np.vdot(d, solve(d)).real) * energy

    solve = _noise_inv(model, m, noise_cov)
    tm, tn = block(th, src_mu), block(th, src_rho)
    kappa = steering_vector(geometry, tm + block(mu, src_mu)) - steering_vector(geometry, tm)
    varrho = steering_vector(geometry, tn) - steering_vector(geometry, tn + block(rho, src_rho))
    sm, sn = wave[:, src_mu], wave[:, src_rho]
    kk = np.vdot(kappa, solve(kappa)).real
    rr = np.vdot(varrho, solve(varrho)).real
    kr = np.vdot(kappa, solve(varrho))
    val = (
        kk * np.sum(np.abs(sm) ** 2)
        + rr * np.sum(np.abs(sn) ** 2)
        + 2.0 * (kr * np.sum(np.conj(sm) * sn)).real
    )
    return float(max(val, 0.0))


def zeta_dense(
    geometry: ArrayGeometry,
    model: Conditional,
    theta: Sequence[float],
    mu: Sequence[float],
    rho: Sequence[float],
    noise_cov: Optional[np.ndarray] = None,
) -> float:
    """Direct evaluation of the whitened distance, any displacements."""
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    n_src = model.n_sources
    a_mu = steering_matrix(geometry, th + np.asarray(mu, dtype=float), n_src)
    a_rho = steering_matrix(geometry, th + np.asarray(rho, dtype=float), n_src)
    diff = (a_mu - a_rho) @ model.waveform.T
    solve = _noise_inv(model, geometry.n_sensors, noise_cov)
    return float(np.sum((diff.conj() * solve(diff)).real))


def log_eta_prime_mean(
    args: EtaArgs,
    theta: Sequence[float],
    geometry: ArrayGeometry,
    model: Conditional,
    noise_cov: Optional[np.ndarray] = None,
    method: str = "auto",
) -> float:
    """Natural log of ``eta'`` for the conditional Gaussian model.

    Args:
        args: Exponents and displacements.
        theta: Reference parameter vector.
        geometry: Sensor layout.
        model: Conditional model.
        noise_cov: Optional noise covariance; defaults to white noise.
        method: ``"zeta"`` (single-parameter displacements), ``"dense"`` or ``"auto"``.

    Returns:
        ``-(a(1-a-b) zeta(u,0) + a b zeta(u,v) + b(1-a-b) zeta(v,0))``.
    """
    al, be = args.alpha, args.beta
    w = 1.0 - al - be
    zero = np.zeros(args.q)
    if method == "auto":
        simple = np.count_nonzero(args.u) <= 1 and np.count_nonzero(args.v) <= 1
        method = "zeta" if simple else "dense"
    if method == "zeta":
        fn = zeta
    elif method == "dense":
        fn = zeta_dense
    else:
        raise ValueError(f"unknown method {method!r}")
    total = 0.0
    if al * w != 0.0:
        total += al * w * fn(geometry, model, theta, args.u, zero, noise_cov)
    if al * be != 0.0:
        total += al * be * fn(geometry, model, theta, args.u, args.v, noise_cov)
    if be * w != 0.0:
        total += be * w * fn(geometry, model, theta, args.v, zero, noise_cov)
    return -total


def eta_prime_mean(args: EtaArgs, theta, geometry, model, noise_cov=None, method: str = "auto") -> float:
    """``exp`` of :func:`log_eta_prime_mean`."""
    return float(np.exp(log_eta_prime_mean(args, theta, geometry, model, noise_cov, method)))


# ---------------------------------------------------------------------------
# Prior integration
# ---------------------------------------------------------------------------

def clipped_lengths(prior: PriorSpec, args: EtaArgs) -> np.ndarray:
    """Per-parameter length of the region where theta, theta+u, theta+v stay in support.

    On one coordinate the region is ``[a - min(0,u,v), b - max(0,u,v)]``; for
    the cases met in G assembly this reduces to ``L - |u|`` (distinct
    parameters or ``v = u``) and ``L - 2|u|`` (``v = -u``). Lengths clamp at 0.
    """
    out = np.empty(args.q)
    for k, e in enumerate(prior.entries):
        if not isinstance(e, Uniform):
            raise TypeError("clipped lengths need uniform entries")
        uk, vk = args.u[k], args.v[k]
        span = max(0.0, uk, vk) - min(0.0, uk, vk)
        out[k] = max(0.0, e.length - span)
    return out


def log_prior_factor(prior: PriorSpec, args: EtaArgs) -> float:
    """Log of the prior integral for a theta-independent ``eta'``.

    Uniform entries give the clipped length ratio, Gaussian entries give
    ``exp(-(a u^2 + b v^2 - (a u + b v)^2) / (2 sigma^2))`` per coordinate.
    """
    if len(prior) != args.q:
        raise ValueError("prior and displacement dimensions disagree")
    total = 0.0
    al, be = args.alpha, args.beta
    for k, e in enumerate(prior.entries):
        uk, vk = args.u[k], args.v[k]
        if isinstance(e, Uniform):
            span = max(0.0, uk, vk) - min(0.0, uk, vk)
            length = e.length - span
            if length <= 0.0:
                return -np.inf
            total += np.log(length / e.length)
        else:
            expo = al * uk * uk + be * vk * vk - (al * uk + be * vk) ** 2
            total -= expo / (2.0 * e.sigma2)
    return float(total)


def integrate_prior_uniform(
    eta_prime: Callable,
    prior: PriorSpec,
    args: EtaArgs,
    theta_independent: bool,
    nodes: int = 512,
    vectorized: bool = False,
) -> float:
    """Integrate ``eta'`` against a uniform prior over the clipped support.

    Args:
        eta_prime: When ``theta_independent`` the value of ``eta'`` (a float)
            or a callable evaluated once; otherwise a callable ``theta -> eta'``.
        prior: Uniform prior entries, one per parameter.
        args: Exponents and displacements.
        theta_independent: Whether ``eta'`` is constant in theta.
        nodes: Gauss-Legendre nodes per dimension for the dependent case.
        vectorized: The callable accepts an ``(n, q)`` array and returns ``(n,)``.

    Returns:
        ``eta``; 0 when the region is empty.
    """
    if not prior.is_uniform:
        raise TypeError("integrate_prior_uniform needs uniform entries")
    lengths = clipped_lengths(prior, args)
    if np.any(lengths <= 0.0):
        return 0.0
    ratio = float(np.prod([lk / e.length for lk, e in zip(lengths, prior.entries)]))
    if theta_independent:
        val = eta_prime() if callable(eta_prime) else float(eta_prime)
        return float(val) * ratio
    x, w = np.polynomial.legendre.leggauss(nodes)
    axes, weights = [], []
    for k, e in enumerate(prior.entries):
        uk, vk = args.u[k], args.v[k]
        lo = e.a - min(0.0, uk, vk)
        hi = e.b - max(0.0, uk, vk)
        axes.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        weights.append(0.5 * (hi - lo) * w)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, args.q)
    wts = weights[0]
    for wk in weights[1:]:
        wts = np.multiply.outer(wts, wk)
    wts = wts.reshape(-1)
    if vectorized:
        vals = np.asarray(eta_prime(grid), dtype=float)
    else:
        vals = np.array([eta_prime(g) for g in grid], dtype=float)
    norm = float(np.prod([e.length for e in prior.entries]))
    return float(np.dot(wts, vals) / norm)


def integrate_prior_gaussian(eta_prime_value: float, prior: PriorSpec, args: EtaArgs) -> float:
    """Multiply a theta-independent ``eta'`` by the Gaussian prior factors."""
    for e in prior.entries:
        if not isinstance(e, Gaussian):
            raise TypeError("integrate_prior_gaussian needs Gaussian entries")
    return float(eta_prime_value) * float(np.exp(log_prior_factor(prior, args)))


# ---------------------------------------------------------------------------
# G assembly
# ---------------------------------------------------------------------------

LogEta = Callable[[EtaArgs], float]


def _unit(q: int, k: int, val: float) -> np.ndarray:
    e = np.zeros(q)
    e[k] = val
    return e


def assemble_g_element(k: int, l: int, s: Sequence[float], h: Sequence[float], log_eta: LogEta) -> float:
    """One entry of G from six ``eta`` evaluations.

    Args:
        k: Row index.
        l: Column index.
        s: Exponents, one per parameter.
        h: Test points, one per parameter.
        log_eta: Callable returning ``log eta(args)`` (``-inf`` for zero).

    Returns:
        ``[eta(sk,sl,hk,hl) + eta(1-sk,1-sl,-hk,-hl) - eta(sk,1-sl,hk,-hl)
        - eta(1-sk,sl,-hk,hl)] / [eta(sk,0,hk,0) eta(0,sl,0,hl)]``.

    Raises:
        DegenerateGError: The denominator is zero.
    """
    s = np.asarray(s, dtype=float)
    h = np.asarray(h, dtype=float)
    q = h.size
    sk, sl = float(s[k]), float(s[l])
    hk, hl = _unit(q, k, h[k]), _unit(q, l, h[l])
    den = log_eta(EtaArgs(sk, 0.0, hk, np.zeros(q))) + log_eta(EtaArgs(0.0, sl, np.zeros(q), hl))
    if not np.isfinite(den):
        raise DegenerateGError(f"zero denominator for G[{k},{l}]")
    pos = [log_eta(EtaArgs(sk, sl, hk, hl)), log_eta(EtaArgs(1 - sk, 1 - sl, -hk, -hl))]
    neg = [log_eta(EtaArgs(sk, 1 - sl, hk, -hl)), log_eta(EtaArgs(1 - sk, sl, -hk, hl))]
    return combine_log_terms(pos, neg, den)


def combine_log_terms(pos, neg, log_den):
    """``(sum exp(pos) - sum exp(neg)) / exp(log_den)`` with the largest exponent factored out.

    Works elementwise on arrays; all-``-inf`` numerators give 0 and NaN inputs give NaN.
    """
    pos = [np.asarray(p, dtype=float) for p in pos]
    neg = [np.asarray(n, dtype=float) for n in neg]
    top = np.maximum.reduce(pos + neg)
    safe = np.where(np.isfinite(top), top, 0.0)
    acc = sum(np.exp(p - safe) for p in pos) - sum(np.exp(n - safe) for n in neg)
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.where(np.isfinite(top), np.exp(safe - log_den) * acc, 0.0)
    out = np.where(np.isnan(top) | np.isnan(log_den), np.nan, out)
    return out if out.ndim else float(out)


def g_matrix(s: Sequence[float], h: Sequence[float], log_eta: LogEta) -> GMatrix:
    """Full symmetric G built from :func:`assemble_g_element`."""
    h = np.atleast_1d(np.asarray(h, dtype=float))
    s = np.atleast_1d(np.asarray(s, dtype=float))
    q = h.size
    g = np.empty((q, q))
    for k in range(q):
        for l in range(k, q):
            g[k, l] = g[l, k] = assemble_g_element(k, l, s, h, log_eta)
    return GMatrix(g, h, s)


def make_log_eta(
    geometry: ArrayGeometry,
    model,
    prior: PriorSpec,
    n_sources: int = 1,
    method: str = "auto",
    nodes: int = 512,
    noise_cov: Optional[np.ndarray] = None,
) -> LogEta:
    """Build a prior-integrated ``log eta`` evaluator for one scenario.

    Single-source models with white noise give a theta-independent ``eta'``,
    which is evaluated once at the prior centre and multiplied by the prior
    factors. Other cases integrate ``eta'`` numerically over a uniform prior.
    """
    q = len(prior)
    centre = np.array([0.5 * (e.a + e.b) if isinstance(e, Uniform) else e.mu for e in prior.entries])
    if isinstance(model, Unconditional):
        def log_eta_prime(args, theta):
            return log_eta_prime_cov(args, theta, geometry, model, n_sources, method)
    elif isinstance(model, Conditional):
        if model.n_sources != n_sources:
            raise ValueError("waveform columns must match n_sources")
        zmethod = "auto" if method in ("auto", "lemma") else method

        def log_eta_prime(args, theta):
            return log_eta_prime_mean(args, theta, geometry, model, noise_cov, zmethod)
    else:
        raise TypeError(f"unsupported model {model!r}")

    independent = n_sources == 1 and noise_cov is None

    def log_eta(args: EtaArgs) -> float:
        if args.q != q:
            raise ValueError("displacement dimension does not match the prior")
        if independent:
            lp = log_prior_factor(prior, args)
            if lp == -np.inf:
                return -np.inf
            return log_eta_prime(args, centre) + lp
        val = integrate_prior_uniform(
            lambda th: np.exp(log_eta_prime(args, th)), prior, args, False, nodes
        )
        return float(np.log(val)) if val > 0 else -np.inf

    return log_eta
