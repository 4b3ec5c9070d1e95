"""Oracle-backed validation suites.

Each suite compares a closed-form or fast path against an independent
brute-force oracle and reports one :class:`CheckResult` per comparison.
The CLI ``validate`` subcommand and the test suite both run these.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .closed_form import (
    PlanarBoundInputs,
    linear_cwwb,
    linear_uwwb,
    planar_g_cond,
    planar_g_uncond,
)
from .general import (
    EtaArgs,
    InvalidRegionError,
    det_combo2,
    det_combo3,
    eta_prime_cov,
    eta_prime_mean,
    g_matrix,
    integrate_prior_uniform,
    log_det_cov,
    log_prior_factor,
    make_log_eta,
    zeta,
    zeta_dense,
)
from .geometry import ArrayGeometry, ula
from .models import Conditional, Gaussian, PriorSpec, Uniform, Unconditional, constant_waveform
from .oracle import dense_det_combo, mc_eta_prime, quadrature_eta

DET_TOL = 1e-10
QUAD_TOL = 1e-8
XCHECK_TOL = 1e-10
FD_TOL = 1e-6
MC_SIGMAS = 3.0


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one oracle comparison."""

    name: str
    deviation: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.deviation) and self.deviation <= self.tolerance)


@dataclass(frozen=True)
class SuiteReport:
    """All checks of one suite."""

    suite: str
    checks: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def n_passed(self) -> int:
        return sum(c.passed for c in self.checks)

    @property
    def max_deviation(self) -> float:
        return max((c.deviation for c in self.checks), default=float("nan"))

    def lines(self, verbose: bool = False) -> list[str]:
        """Human-readable report, one line per failing check plus a summary."""
        out = []
        for c in self.checks:
            if verbose or not c.passed:
                tag = "ok  " if c.passed else "FAIL"
                out.append(f"  {tag} {c.name}: dev={c.deviation:.3e} tol={c.tolerance:.1e} {c.detail}".rstrip())
        status = "PASS" if self.passed else "FAIL"
        out.append(
            f"{status} {self.suite}: {self.n_passed}/{len(self.checks)} checks, "
            f"max deviation {self.max_deviation:.3e}"
        )
        return out


def _rel(a: float, b: float) -> float:
    scale = max(abs(b), np.finfo(float).tiny)
    return abs(a - b) / scale


def _random_planar(rng: np.random.Generator, m: int, extent: float = 2.0) -> ArrayGeometry:
    return ArrayGeometry(rng.uniform(-extent, extent, size=(m, 2)), f"random{m}")


def _unit_theta(rng: np.random.Generator, q: int = 2) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=q)


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

def suite_det_lemmas(seed: int = 0, instances: int = 200) -> SuiteReport:
    """Determinant lemmas against explicit inverses and generic determinants."""
    rng = np.random.default_rng(seed)
    checks = []
    for i in range(instances):
        m = int(rng.integers(2, 5))
        geo = _random_planar(rng, m)
        model = Unconditional(float(rng.uniform(0.1, 5.0)), float(rng.uniform(0.2, 2.0)))
        thetas = [_unit_theta(rng) for _ in range(3)]
        if i % 2 == 0:
            w = float(rng.uniform(0.05, 0.95))
            weights = [w, 1.0 - w]
            ld, sg = det_combo2(geo, model, weights[0], weights[1], thetas[0], thetas[1])
            name = f"det_combo2[{i}]"
        else:
            # the third weight may be negative, as in the eta' exponents
            a, b = rng.uniform(0.05, 0.9, size=2)
            weights = [float(a), float(b), float(1.0 - a - b)]
            ld, sg = det_combo3(geo, model, *weights, *thetas)
            name = f"det_combo3[{i}]"
        k = len(weights)
        ref_ld, ref_sg = dense_det_combo(geo, model, weights, thetas[:k])
        dev = abs(np.expm1(ld - ref_ld)) if sg == ref_sg else np.inf
        # the single-covariance log-determinant rides along in the same check
        ref = -dense_det_combo(geo, model, [1.0], [thetas[0]])[0]
        dev_cov = abs(np.expm1(log_det_cov(geo, model, thetas[0]) - ref))
        checks.append(CheckResult(name, float(max(dev, dev_cov)), DET_TOL, f"M={m}"))
    return SuiteReport("appendix-c", tuple(checks))


def suite_zeta(seed: int = 0, instances: int = 60) -> SuiteReport:
    """Multi-source whitened distances against the dense definition."""
    rng = np.random.default_rng(seed)
    checks = []
    for i in range(instances):
        m = int(rng.integers(2, 7))
        geo = _random_planar(rng, m)
        n_src = int(rng.integers(1, 4))
        t = int(rng.integers(1, 6))
        wave = rng.normal(size=(t, n_src)) + 1j * rng.normal(size=(t, n_src))
        model = Conditional(wave, float(rng.uniform(0.3, 2.0)))
        q = 2 * n_src
        theta = rng.uniform(-1.0, 1.0, size=q)
        mu = np.zeros(q)
        rho = np.zeros(q)
        mu[rng.integers(q)] = rng.uniform(-1.0, 1.0)
        if rng.random() < 0.8:
            rho[rng.integers(q)] = rng.uniform(-1.0, 1.0)
        noise = None
        if i % 3 == 2:
            b = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
            noise = b @ b.conj().T + m * np.eye(m)
        got = zeta(geo, model, theta, mu, rho, noise)
        ref = zeta_dense(geo, model, theta, mu, rho, noise)
        kind = "coloured" if noise is not None else "white"
        checks.append(CheckResult(f"zeta[{i}]", _rel(got, ref), DET_TOL, f"N={n_src} {kind}"))
    return SuiteReport("appendix-d", tuple(checks))


def _mc_instance(rng: np.random.Generator, conditional: bool):
    geo = _random_planar(rng, 2, extent=1.0)
    if conditional:
        model = Conditional(np.array([rng.uniform(0.5, 1.2) * np.exp(2j * np.pi * rng.random())]), 1.0)
    else:
        model = Unconditional(float(rng.uniform(0.3, 1.5)), 1.0, 1)
    al, be = rng.uniform(0.1, 0.25, size=2)
    theta = rng.uniform(-0.5, 0.5, size=2)
    u = np.zeros(2)
    v = np.zeros(2)
    u[0] = rng.uniform(-0.4, 0.4)
    v[int(rng.integers(2))] = rng.uniform(-0.4, 0.4)
    return geo, model, EtaArgs(float(al), float(be), u, v), theta


def suite_eta_mc(seed: int = 0, instances: int = 5, samples: int = 1_000_000) -> SuiteReport:
    """Closed-form eta' against Monte Carlo likelihood-ratio averages.

    Deviations are in units of the Monte Carlo standard error.
    """
    rng = np.random.default_rng(seed)
    checks = []
    for conditional in (False, True):
        for i in range(instances):
            geo, model, args, theta = _mc_instance(rng, conditional)
            if conditional:
                val = eta_prime_mean(args, theta, geo, model)
                name = f"eta_prime_mean[{i}]"
            else:
                val = eta_prime_cov(args, theta, geo, model)
                name = f"eta_prime_cov[{i}]"
            est, se = mc_eta_prime(args, theta, geo, model, samples, rng)
            dev = abs(est - val) / se if se > 0 else (0.0 if est == val else np.inf)
            checks.append(
                CheckResult(name, float(dev), MC_SIGMAS, f"closed={val:.6f} mc={est:.6f}+-{se:.1e}")
            )
    return SuiteReport("eta-mc", tuple(checks))


def _random_prior_tuple(rng: np.random.Generator):
    q = int(rng.integers(1, 3))
    entries = []
    for _ in range(q):
        if rng.random() < 0.5:
            a = float(rng.uniform(-1.5, -0.5))
            entries.append(Uniform(a, a + float(rng.uniform(1.0, 3.0))))
        else:
            entries.append(Gaussian(float(rng.uniform(-0.5, 0.5)), float(rng.uniform(0.01, 0.5))))
    prior = PriorSpec(tuple(entries))
    al, be = rng.uniform(0.05, 0.6, size=2)
    if al + be > 1.0:
        al, be = al / 2, be / 2
    u = np.zeros(q)
    v = np.zeros(q)
    for k, e in enumerate(entries):
        reach = 0.45 * e.length if isinstance(e, Uniform) else 2.0 * np.sqrt(e.sigma2)
        u[k] = rng.uniform(-reach, reach)
        v[k] = rng.choice([0.0, u[k], -u[k], rng.uniform(-reach, reach)])
    return prior, EtaArgs(float(al), float(be), u, v)


def suite_prior_quadrature(seed: int = 0, instances: int = 20) -> SuiteReport:
    """Prior factors and the uniform-prior integrator against trapezoid quadrature."""
    rng = np.random.default_rng(seed)
    checks = []
    for i in range(instances):
        prior, args = _random_prior_tuple(rng)
        ref = quadrature_eta(1.0, prior, args)
        got = float(np.exp(log_prior_factor(prior, args)))
        kinds = "".join("U" if isinstance(e, Uniform) else "G" for e in prior.entries)
        checks.append(CheckResult(f"prior_factor[{i}]", _rel(got, ref), QUAD_TOL, kinds))
    # theta-dependent integrand on [-1, 1]: a smooth eta' with genuine theta variation
    for i in range(5):
        prior = PriorSpec.unit_uniform(1)
        c, f = rng.uniform(0.2, 2.0), rng.uniform(0.3, 1.5)
        u = float(rng.uniform(-0.8, 0.8))
        args = EtaArgs(0.5, 0.0, np.array([u]), np.zeros(1))

        def eta_p(th, c=c, f=f):
            x = np.asarray(th, dtype=float).reshape(-1)
            return np.exp(-c * np.sin(np.pi * f * x) ** 2)

        got = integrate_prior_uniform(eta_p, prior, args, False, vectorized=True)
        ref = quadrature_eta(lambda th: eta_p(th[:, 0]), prior, args)
        checks.append(CheckResult(f"integrate_uniform[{i}]", _rel(got, ref), QUAD_TOL, "theta-dependent"))
    return SuiteReport("prior-quadrature", tuple(checks))


def _xcheck_model(rng: np.random.Generator, conditional: bool, snr_db: float):
    if conditional:
        return Conditional(constant_waveform(int(rng.integers(1, 11))), 1.0).with_snr_db(snr_db)
    return Unconditional(1.0, 1.0, int(rng.integers(1, 11))).with_snr_db(snr_db)


def suite_closed_form_xcheck(seed: int = 0, instances: int = 50, max_draws: int = 100) -> SuiteReport:
    """Planar closed-form G entries against the general eta assembly.

    Off-diagonal deviations are normalised by ``sqrt(G_uu G_vv)`` because
    ``G_uv`` vanishes identically for some geometries. Draws where either path
    reports an invalid region are retried; a one-sided invalid result fails.
    """
    rng = np.random.default_rng(seed)
    prior = PriorSpec.unit_uniform(2)
    checks = []
    for conditional in (False, True):
        label = "cond" if conditional else "uncond"
        fn = planar_g_cond if conditional else planar_g_uncond
        for i in range(instances):
            geo = _random_planar(rng, int(rng.integers(1, 7)))
            for _ in range(max_draws):
                model = _xcheck_model(rng, conditional, float(rng.uniform(-20.0, 5.0)))
                hu, hv = rng.uniform(0.02, 1.9, size=2) * rng.choice([-1.0, 1.0], size=2)
                su, sv = rng.uniform(0.2, 0.8, size=2)
                try:
                    cf = fn(PlanarBoundInputs(geo, model, float(hu), float(hv), float(su), float(sv))).entries
                    cf_ok = True
                except InvalidRegionError:
                    cf_ok = False
                try:
                    ref = g_matrix([su, sv], [hu, hv], make_log_eta(geo, model, prior)).entries
                    ref_ok = bool(np.all(np.isfinite(ref)))
                except (InvalidRegionError, ValueError):
                    ref_ok = False
                if cf_ok != ref_ok:
                    checks.append(CheckResult(f"{label}[{i}]", np.inf, XCHECK_TOL, "validity disagrees"))
                    break
                if cf_ok:
                    scale = np.sqrt(abs(ref[0, 0] * ref[1, 1]))
                    dev = max(
                        _rel(cf[0, 0], ref[0, 0]),
                        _rel(cf[1, 1], ref[1, 1]),
                        abs(cf[0, 1] - ref[0, 1]) / scale,
                    )
                    checks.append(CheckResult(f"{label}[{i}]", float(dev), XCHECK_TOL, f"M={geo.n_sensors}"))
                    break
            else:
                checks.append(CheckResult(f"{label}[{i}]", np.inf, XCHECK_TOL, "no valid draw"))
    return SuiteReport("closed-form-xcheck", tuple(checks))


def suite_s_stationarity(seed: int = 0, instances: int = 20, step: float = 1e-4) -> SuiteReport:
    """Central difference of the linear-array bound in s at s = 1/2."""
    rng = np.random.default_rng(seed)
    checks = []
    for i in range(instances):
        geo = ula(int(rng.integers(2, 11)))
        snr = float(rng.uniform(-25.0, 15.0))
        h = float(rng.uniform(0.01, 1.9) * rng.choice([-1.0, 1.0]))
        for conditional in (False, True):
            model = _xcheck_model(rng, conditional, snr)
            bound = linear_cwwb if conditional else linear_uwwb
            fd = (bound(h, 0.5 + step, geo, model) - bound(h, 0.5 - step, geo, model)) / (2.0 * step)
            label = "cwwb" if conditional else "uwwb"
            checks.append(CheckResult(f"{label}[{i}]", abs(fd), FD_TOL, f"h={h:.4f} snr={snr:.1f}dB"))
    return SuiteReport("s-stationarity", tuple(checks))


SUITES: dict[str, Callable[..., SuiteReport]] = {
    "appendix-c": suite_det_lemmas,
    "appendix-d": suite_zeta,
    "eta-mc": suite_eta_mc,
    "prior-quadrature": suite_prior_quadrature,
    "closed-form-xcheck": suite_closed_form_xcheck,
    "s-stationarity": suite_s_stationarity,
}

# Closed-form operation -> suites that check it against an oracle.
ORACLE_MANIFEST: dict[str, tuple[str, ...]] = {
    "general.log_det_cov": ("appendix-c",),
    "general.det_combo2": ("appendix-c",),
    "general.det_combo3": ("appendix-c",),
    "general.log_eta_prime_cov": ("eta-mc",),
    "general.eta_prime_cov": ("eta-mc",),
    "general.zeta": ("appendix-d",),
    "general.log_eta_prime_mean": ("eta-mc",),
    "general.eta_prime_mean": ("eta-mc",),
    "general.clipped_lengths": ("prior-quadrature",),
    "general.log_prior_factor": ("prior-quadrature",),
    "general.integrate_prior_uniform": ("prior-quadrature",),
    "general.integrate_prior_gaussian": ("prior-quadrature",),
    "general.assemble_g_element": ("closed-form-xcheck",),
    "general.combine_log_terms": ("closed-form-xcheck",),
    "general.g_matrix": ("closed-form-xcheck",),
    "general.make_log_eta": ("closed-form-xcheck",),
    "closed_form.steering_sum": ("closed-form-xcheck",),
    "closed_form.planar_g_arrays": ("closed-form-xcheck",),
    "closed_form.planar_g_uncond": ("closed-form-xcheck",),
    "closed_form.planar_g_cond": ("closed-form-xcheck",),
    "closed_form.linear_g_array": ("s-stationarity", "closed-form-xcheck"),
    "closed_form.linear_uwwb": ("s-stationarity",),
    "closed_form.linear_cwwb": ("s-stationarity",),
}


def run_suite(name: str, seed: int = 0) -> SuiteReport:
    """Run one named suite.

    Args:
        name: One of :data:`SUITES`.
        seed: Seed for the random instances.

    Returns:
        The suite report.

    Raises:
        KeyError: Unknown suite name.
    """
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name](seed=seed)
