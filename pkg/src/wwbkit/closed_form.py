"""Single-source closed forms of G for planar and linear arrays.

The prior is uniform on [-1, 1] for every parameter. Functions named
``*_arrays`` are vectorized over broadcastable ``h``/``s`` arrays and return
NaN at points where a ``(1 + x)^-T`` base is non-positive; the scalar
functions raise :class:`~wwbkit.general.InvalidRegionError` instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .general import GMatrix, InvalidRegionError, combine_log_terms
from .geometry import ArrayGeometry
from .models import Conditional, SignalModel, Unconditional


def steering_sum(geometry: ArrayGeometry, cu, cv=0.0):
    """``sum_k exp(-j 2 pi (dx_k cu + dy_k cv))``, broadcast over ``cu`` and ``cv``."""
    cu = np.asarray(cu, dtype=float)
    cv = np.asarray(cv, dtype=float)
    phase = 2.0 * np.pi * (cu[..., None] * geometry.dx + cv[..., None] * geometry.dy)
    out = np.exp(-1j * phase).sum(axis=-1)
    return out if out.ndim else complex(out)


def _cos_gap(geometry: ArrayGeometry, cu, cv):
    """``M - sum_k cos(2 pi (dx_k cu + dy_k cv))`` without cancellation."""
    cu = np.asarray(cu, dtype=float)
    cv = np.asarray(cv, dtype=float)
    half = np.pi * (cu[..., None] * geometry.dx + cv[..., None] * geometry.dy)
    return 2.0 * np.sum(np.sin(half) ** 2, axis=-1)


def _log_pow(x, t: int):
    """``log((1 + x)^-t)``; NaN where ``1 + x <= 0``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = -t * np.log1p(x)
    return np.where(1.0 + x > 0.0, out, np.nan)


def _log_len(x):
    """Log of a clamped length factor, ``-inf`` when it vanishes."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(x > 0.0, np.log(np.maximum(x, 1e-300)), -np.inf)


@dataclass(frozen=True)
class PlanarBoundInputs:
    """One (h, s) evaluation point for a planar array and a uniform [-1, 1]^2 prior."""

    geometry: ArrayGeometry
    model: SignalModel
    h_u: float
    h_v: float
    s_u: float = 0.5
    s_v: float = 0.5

    def __post_init__(self) -> None:
        for name in ("h_u", "h_v"):
            val = getattr(self, name)
            if val == 0.0:
                raise ValueError(f"{name} must be non-zero")
            if not abs(val) < 2.0:
                raise ValueError(f"|{name}| must be < 2")
        for name in ("s_u", "s_v"):
            val = getattr(self, name)
            if not 0.0 < val < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")


# ---------------------------------------------------------------------------
# Unconditional model
# ---------------------------------------------------------------------------

def _uncond_diag(geometry, model: Unconditional, h, s, axis: int):
    """Diagonal entry along ``axis`` (0 for u, 1 for v)."""
    h = np.asarray(h, dtype=float)
    s = np.asarray(s, dtype=float)
    m = geometry.n_sensors
    t = model.snapshots
    usnr = model.u_snr(m)
    zero = np.zeros_like(h)
    c1 = (h, zero) if axis == 0 else (zero, h)
    c2 = (2 * h, zero) if axis == 0 else (zero, 2 * h)
    b1 = m * m - np.abs(steering_sum(geometry, *c1)) ** 2
    b2 = m * m - np.abs(steering_sum(geometry, *c2)) ** 2
    lhalf = _log_len(1.0 - np.abs(h) / 2.0)
    lfull = _log_len(1.0 - np.abs(h))
    t1 = _log_pow(2 * s * (1 - 2 * s) * usnr * b1, t)
    t2 = _log_pow(2 * (1 - s) * (2 * s - 1) * usnr * b1, t)
    t3 = _log_pow(s * (1 - s) * usnr * b2, t)
    den = 2 * lhalf + 2 * _log_pow(s * (1 - s) * usnr * b1, t)
    general = combine_log_terms([lhalf + t1, lhalf + t2], [np.log(2.0) + lfull + t3], den)
    # s = 1/2: the first two numerator terms equal (1 - |h|/2)
    half_num = [np.log(2.0) + lhalf]
    half_neg = [np.log(2.0) + lfull + _log_pow(0.25 * usnr * b2, t)]
    half_den = 2 * lhalf + 2 * _log_pow(0.25 * usnr * b1, t)
    simple = combine_log_terms(half_num, half_neg, half_den)
    return np.where(s == 0.5, simple, general)


def _uncond_x3(usnr, kappa, w1, w2, w3, b12, b13, b23, triple):
    """Argument x of ``(1 + x)^-T`` for a three-term covariance combination."""
    return usnr * (w1 * w2 * b12 + w1 * w3 * b13 + w2 * w3 * b23) - w1 * w2 * w3 * kappa * triple


def _uncond_cross(geometry, model: Unconditional, hu, hv, su, sv):
    hu, hv, su, sv = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (hu, hv, su, sv)))
    m = geometry.n_sensors
    t = model.snapshots
    usnr = model.u_snr(m)
    kappa = usnr * model.phi(m)
    zero = np.zeros_like(hu)
    s_u = steering_sum(geometry, hu, zero)
    s_v = steering_sum(geometry, zero, hv)
    s_m = steering_sum(geometry, hu, -hv)
    s_p = steering_sum(geometry, hu, hv)
    au, av, am, ap = (np.abs(x) ** 2 for x in (s_u, s_v, s_m, s_p))
    bu, bv, bm, bp = (m * m - x for x in (au, av, am, ap))
    tri_m = 2 * (np.conj(s_v) * s_u * np.conj(s_m)).real - m * (av + au + am) + m ** 3
    tri_p = 2 * (np.conj(s_v) * np.conj(s_u) * s_p).real - m * (av + au + ap) + m ** 3
    x1 = _uncond_x3(usnr, kappa, su, sv, 1 - su - sv, bm, bu, bv, tri_m)
    x2 = _uncond_x3(usnr, kappa, 1 - su, 1 - sv, su + sv - 1, bm, bu, bv, tri_m)
    x3 = _uncond_x3(usnr, kappa, su, 1 - sv, sv - su, bp, bu, bv, tri_p)
    x4 = _uncond_x3(usnr, kappa, 1 - su, sv, su - sv, bp, bu, bv, tri_p)
    den = _log_pow(su * (1 - su) * usnr * bu, t) + _log_pow(sv * (1 - sv) * usnr * bv, t)
    general = combine_log_terms([_log_pow(x1, t), _log_pow(x2, t)], [_log_pow(x3, t), _log_pow(x4, t)], den)
    lm = np.log(2.0) + _log_pow(0.25 * usnr * bm, t)
    lp = np.log(2.0) + _log_pow(0.25 * usnr * bp, t)
    half_den = _log_pow(0.25 * usnr * bu, t) + _log_pow(0.25 * usnr * bv, t)
    simple = combine_log_terms([lm], [lp], half_den)
    return np.where((su == 0.5) & (sv == 0.5), simple, general)


# ---------------------------------------------------------------------------
# Conditional model
# ---------------------------------------------------------------------------

def _cond_diag(geometry, model: Conditional, h, s, axis: int):
    h = np.asarray(h, dtype=float)
    s = np.asarray(s, dtype=float)
    c = model.c_snr()
    zero = np.zeros_like(h)
    c1 = (h, zero) if axis == 0 else (zero, h)
    c2 = (2 * h, zero) if axis == 0 else (zero, 2 * h)
    d1 = 2 * c * _cos_gap(geometry, *c1)
    d2 = 2 * c * _cos_gap(geometry, *c2)
    lhalf = _log_len(1.0 - np.abs(h) / 2.0)
    lfull = _log_len(1.0 - np.abs(h))
    e1 = 2 * s * (2 * s - 1) * d1
    e2 = 2 * (1 - s) * (1 - 2 * s) * d1
    e3 = -s * (1 - s) * d2
    den = 2 * lhalf - 2 * s * (1 - s) * d1
    general = combine_log_terms([lhalf + e1, lhalf + e2], [np.log(2.0) + lfull + e3], den)
    simple = combine_log_terms(
        [np.log(2.0) + lhalf], [np.log(2.0) + lfull - 0.25 * d2], 2 * lhalf - 0.5 * d1
    )
    return np.where(s == 0.5, simple, general)


def _cond_cross(geometry, model: Conditional, hu, hv, su, sv):
    hu, hv, su, sv = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (hu, hv, su, sv)))
    c = model.c_snr()
    zero = np.zeros_like(hu)
    du = 2 * c * _cos_gap(geometry, hu, zero)
    dv = 2 * c * _cos_gap(geometry, zero, hv)
    dm = 2 * c * _cos_gap(geometry, hu, -hv)
    dp = 2 * c * _cos_gap(geometry, hu, hv)

    def expo(a, b, dab):
        w = 1 - a - b
        return -(a * w * du + a * b * dab + b * w * dv)

    e1 = expo(su, sv, dm)
    e2 = expo(1 - su, 1 - sv, dm)
    e3 = expo(su, 1 - sv, dp)
    e4 = expo(1 - su, sv, dp)
    den = -su * (1 - su) * du - sv * (1 - sv) * dv
    general = combine_log_terms([e1, e2], [e3, e4], den)
    simple = combine_log_terms(
        [np.log(2.0) - 0.25 * dm], [np.log(2.0) - 0.25 * dp], -0.25 * (du + dv)
    )
    return np.where((su == 0.5) & (sv == 0.5), simple, general)


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------

def planar_g_arrays(geometry: ArrayGeometry, model: SignalModel, hu, hv, su, sv):
    """Vectorized ``(G_uu, G_vv, G_uv)`` for either model.

    Returns:
        Three arrays of the broadcast shape; NaN marks invalid points.
    """
    if isinstance(model, Unconditional):
        diag, cross = _uncond_diag, _uncond_cross
    elif isinstance(model, Conditional):
        if model.n_sources != 1:
            raise ValueError("closed forms cover one source only")
        diag, cross = _cond_diag, _cond_cross
    else:
        raise TypeError(f"unsupported model {model!r}")
    with np.errstate(over="ignore", invalid="ignore"):
        guu = diag(geometry, model, hu, su, 0)
        gvv = diag(geometry, model, hv, sv, 1)
        guv = cross(geometry, model, hu, hv, su, sv)
    return guu, gvv, guv


def linear_g_array(geometry: ArrayGeometry, model: SignalModel, h, s):
    """Vectorized scalar G for a single parameter along x."""
    if isinstance(model, Unconditional):
        diag = _uncond_diag
    elif isinstance(model, Conditional):
        if model.n_sources != 1:
            raise ValueError("closed forms cover one source only")
        diag = _cond_diag
    else:
        raise TypeError(f"unsupported model {model!r}")
    with np.errstate(over="ignore", invalid="ignore"):
        return diag(geometry, model, h, s, 0)


def _as_gmatrix(inputs: PlanarBoundInputs, guu, gvv, guv) -> GMatrix:
    vals = np.array([guu, gvv, guv], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise InvalidRegionError(f"closed form undefined at {inputs}")
    g = np.array([[vals[0], vals[2]], [vals[2], vals[1]]])
    return GMatrix(g, [inputs.h_u, inputs.h_v], [inputs.s_u, inputs.s_v])


def planar_g_uncond(inputs: PlanarBoundInputs) -> GMatrix:
    """2 x 2 G for the unconditional model.

    Example:
        >>> from wwbkit.geometry import uca
        >>> g = planar_g_uncond(PlanarBoundInputs(uca(8), Unconditional(1.0), 0.3, 0.2))
        >>> g.entries.shape
        (2, 2)
    """
    if not isinstance(inputs.model, Unconditional):
        raise TypeError("planar_g_uncond needs an unconditional model")
    vals = planar_g_arrays(inputs.geometry, inputs.model, inputs.h_u, inputs.h_v, inputs.s_u, inputs.s_v)
    return _as_gmatrix(inputs, *vals)


def planar_g_cond(inputs: PlanarBoundInputs) -> GMatrix:
    """2 x 2 G for the conditional model."""
    if not isinstance(inputs.model, Conditional):
        raise TypeError("planar_g_cond needs a conditional model")
    vals = planar_g_arrays(inputs.geometry, inputs.model, inputs.h_u, inputs.h_v, inputs.s_u, inputs.s_v)
    return _as_gmatrix(inputs, *vals)


def _linear_bound(h: float, s: float, geometry: ArrayGeometry, model: SignalModel) -> float:
    if not geometry.is_linear:
        raise ValueError("linear closed forms need a linear geometry")
    if h == 0.0 or not abs(h) < 2.0:
        raise ValueError("need 0 < |h| < 2")
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")
    g = float(linear_g_array(geometry, model, h, s))
    if g == np.inf:
        # G beyond float range: the bound underflows to zero
        return 0.0
    if not np.isfinite(g) or g <= 0.0:
        raise InvalidRegionError(f"closed form undefined at h={h}, s={s}")
    return h * h / g


def linear_uwwb(h: float, s: float, geometry: ArrayGeometry, model: Unconditional) -> float:
    """Bound ``h^2 / G`` for a linear array under the unconditional model.

    Args:
        h: Test point, ``0 < |h| < 2``.
        s: Exponent in (0, 1).
        geometry: Linear array.
        model: Unconditional model.

    Returns:
        Non-negative bound value at this (h, s).
    """
    if not isinstance(model, Unconditional):
        raise TypeError("linear_uwwb needs an unconditional model")
    return _linear_bound(h, s, geometry, model)


def linear_cwwb(h: float, s: float, geometry: ArrayGeometry, model: Conditional) -> float:
    """Bound ``h^2 / G`` for a linear array under the conditional model."""
    if not isinstance(model, Conditional):
        raise TypeError("linear_cwwb needs a conditional model")
    return _linear_bound(h, s, geometry, model)
