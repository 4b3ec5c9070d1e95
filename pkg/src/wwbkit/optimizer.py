"""Grid maximization of the bound over test points h and exponents s."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .closed_form import linear_g_array, planar_g_arrays
from .general import GMatrix, g_matrix, make_log_eta
from .geometry import ArrayGeometry
from .models import Gaussian, PriorSpec, Uniform

COND_CAP = 1e12
DEFAULT_H_COUNT = 200
DEFAULT_H_MIN = 1e-3


class SingularGError(ValueError):
    """G is singular or too ill-conditioned to invert."""


class NoValidPointError(ValueError):
    """Every grid point was invalid."""


@dataclass(frozen=True)
class LogGrid:
    """Log-spaced magnitudes in ``[h_min, h_max]``, used with both signs."""

    h_min: float
    h_max: float
    count: int

    def __post_init__(self) -> None:
        if not 0.0 < self.h_min <= self.h_max or int(self.count) != self.count or self.count < 1:
            raise ValueError("need 0 < h_min <= h_max and an integer count >= 1")
        object.__setattr__(self, "count", int(self.count))

    def values(self) -> np.ndarray:
        return log_h_grid(self.h_min, self.h_max, self.count)


HGridSpec = Union[None, LogGrid, Sequence[float]]


def support_length(entry) -> float:
    """Prior support length; Gaussian entries use a 10-sigma window."""
    if isinstance(entry, Uniform):
        return entry.length
    if isinstance(entry, Gaussian):
        return 10.0 * float(np.sqrt(entry.sigma2))
    raise TypeError(f"unsupported prior entry {entry!r}")


def log_h_grid(h_min: float, h_max: float, count: int) -> np.ndarray:
    """``count`` log-spaced magnitudes in [h_min, h_max], positive values first."""
    if not 0.0 < h_min <= h_max or count < 1:
        raise ValueError("need 0 < h_min <= h_max and count >= 1")
    mags = np.geomspace(h_min, h_max, count)
    return np.concatenate([mags, -mags])


@dataclass(frozen=True)
class OptimizerConfig:
    """Search grids and strategy.

    Args:
        h_grid: ``None`` for the default log grid, a :class:`LogGrid`, or an
            explicit list of candidate values used for every parameter.
        s_grid: Candidate exponents in (0, 1).
        strategy: ``"auto"``, ``"joint"`` or ``"profile"``.
        refine: Run one refinement pass around the winner.
        joint_cap: ``"auto"`` switches to profiling above this many joint points.
        cond_cap: Points whose G has a larger condition number are skipped.
    """

    h_grid: HGridSpec = None
    s_grid: tuple = (0.5,)
    strategy: str = "auto"
    refine: bool = False
    joint_cap: int = 250_000
    cond_cap: float = COND_CAP

    def __post_init__(self) -> None:
        s = tuple(float(x) for x in np.atleast_1d(self.s_grid))
        if not s:
            raise ValueError("s_grid must be non-empty")
        if any(not 0.0 < x < 1.0 for x in s):
            raise ValueError("s_grid values must lie in (0, 1)")
        object.__setattr__(self, "s_grid", s)
        if self.strategy not in ("auto", "joint", "profile"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        hg = self.h_grid
        if hg is not None and not isinstance(hg, LogGrid):
            hg = tuple(float(x) for x in hg)
            if not hg:
                raise ValueError("h_grid must be non-empty")
            if any(x == 0.0 or not np.isfinite(x) for x in hg):
                raise ValueError("h_grid values must be finite and non-zero")
            object.__setattr__(self, "h_grid", hg)

    def h_grids(self, prior: PriorSpec) -> list[np.ndarray]:
        """Per-parameter candidate test points."""
        out = []
        for e in prior.entries:
            length = support_length(e)
            if self.h_grid is None:
                grid = log_h_grid(DEFAULT_H_MIN, length - DEFAULT_H_MIN, DEFAULT_H_COUNT)
            elif isinstance(self.h_grid, LogGrid):
                grid = self.h_grid.values()
            else:
                grid = np.array(self.h_grid, dtype=float)
            if np.any(np.abs(grid) >= length):
                raise ValueError(f"h candidates must satisfy |h| < {length}")
            out.append(grid)
        return out


@dataclass(frozen=True)
class WwbResult:
    """Maximized bound and where it was attained."""

    bound: np.ndarray
    best_h: np.ndarray
    best_s: np.ndarray
    objective: float
    g: GMatrix
    evaluated: int = 0
    skipped: int = 0

    @property
    def diag(self) -> np.ndarray:
        return np.diag(self.bound).copy()


# ---------------------------------------------------------------------------
# Bound from G
# ---------------------------------------------------------------------------

def wwb_from_g(h: Sequence[float], g: Union[GMatrix, np.ndarray], cond_cap: float = COND_CAP) -> np.ndarray:
    """``H G^-1 H`` with ``H = diag(h)``.

    Args:
        h: Test points.
        g: G as a :class:`GMatrix` or a square array.
        cond_cap: Largest accepted condition number.

    Returns:
        ``(q, q)`` bound matrix.

    Raises:
        SingularGError: G is singular or its condition number exceeds ``cond_cap``.
    """
    gm = g.entries if isinstance(g, GMatrix) else np.atleast_2d(np.asarray(g, dtype=float))
    h = np.atleast_1d(np.asarray(h, dtype=float))
    q = h.size
    if gm.shape != (q, q):
        raise ValueError("h and G dimensions disagree")
    if q == 1:
        if gm[0, 0] == 0.0:
            raise SingularGError("G is zero")
        return np.array([[h[0] * h[0] / gm[0, 0]]])
    cond = np.linalg.cond(gm)
    if not np.isfinite(cond) or cond > cond_cap:
        raise SingularGError(f"G is ill-conditioned (condition number {cond:.3e})")
    if q == 2:
        a, b, c = gm[0, 0], gm[1, 1], gm[0, 1]
        det = a * b - c * c
        inv = np.array([[b, -c], [-c, a]]) / det
    else:
        inv = np.linalg.inv(gm)
        inv = 0.5 * (inv + inv.T)
    return h[:, None] * inv * h[None, :]


def _batch_objective(h: np.ndarray, g: np.ndarray, cond_cap: float) -> np.ndarray:
    """Trace of ``H G^-1 H`` for a batch; NaN where G is invalid."""
    q = h.shape[1]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if q == 1:
            gg = g[:, 0, 0]
            obj = h[:, 0] ** 2 / gg
            ok = np.isfinite(gg) & (gg > 0)
        elif q == 2:
            a, b, c = g[:, 0, 0], g[:, 1, 1], g[:, 0, 1]
            det = a * b - c * c
            obj = (h[:, 0] ** 2 * b + h[:, 1] ** 2 * a) / det
            disc = np.sqrt((a - b) ** 2 + 4 * c * c)
            lmax = 0.5 * (a + b + disc)
            lmin = det / lmax
            ok = np.isfinite(a) & np.isfinite(b) & np.isfinite(c) & (a > 0) & (b > 0) & (det > 0)
            ok &= lmax <= cond_cap * lmin
        else:
            ok = np.all(np.isfinite(g), axis=(1, 2))
            obj = np.full(h.shape[0], np.nan)
            for i in np.flatnonzero(ok):
                w = np.linalg.eigvalsh(g[i])
                if w[0] <= 0 or w[-1] > cond_cap * w[0]:
                    ok[i] = False
                    continue
                obj[i] = float(np.sum(h[i] ** 2 * np.diag(np.linalg.inv(g[i]))))
    ok &= np.isfinite(obj)
    return np.where(ok, obj, np.nan)


# ---------------------------------------------------------------------------
# Evaluators
# ---------------------------------------------------------------------------

class ClosedFormEvaluator:
    """Batched G from the single-source closed forms (uniform [-1, 1] prior)."""

    batched = True

    def __init__(self, geometry: ArrayGeometry, model, q: int) -> None:
        if q not in (1, 2):
            raise ValueError("closed forms cover one or two parameters")
        if q == 1 and not geometry.is_linear:
            raise ValueError("one parameter needs a linear geometry")
        self.geometry = geometry
        self.model = model
        self.q = q

    def __call__(self, h: np.ndarray, s: np.ndarray) -> np.ndarray:
        n = h.shape[0]
        out = np.empty((n, self.q, self.q))
        if self.q == 1:
            out[:, 0, 0] = linear_g_array(self.geometry, self.model, h[:, 0], s[:, 0])
        else:
            guu, gvv, guv = planar_g_arrays(self.geometry, self.model, h[:, 0], h[:, 1], s[:, 0], s[:, 1])
            out[:, 0, 0] = guu
            out[:, 1, 1] = gvv
            out[:, 0, 1] = out[:, 1, 0] = guv
        return out


class GeneralEvaluator:
    """G assembled from ``eta`` evaluations, one point at a time."""

    batched = False

    def __init__(self, geometry: ArrayGeometry, model, prior: PriorSpec, n_sources: int = 1, nodes: int = 512):
        self.q = len(prior)
        self.log_eta = make_log_eta(geometry, model, prior, n_sources=n_sources, nodes=nodes)

    def __call__(self, h: Sequence[float], s: Sequence[float]) -> GMatrix:
        return g_matrix(s, h, self.log_eta)


def make_evaluator(geometry: ArrayGeometry, model, prior: PriorSpec, n_sources: int = 1):
    """Closed forms when they apply, otherwise the general engine."""
    q = len(prior)
    if n_sources == 1 and prior.is_unit_uniform() and (q == 2 or (q == 1 and geometry.is_linear)):
        return ClosedFormEvaluator(geometry, model, q)
    return GeneralEvaluator(geometry, model, prior, n_sources)


def _evaluate(evaluator, h: np.ndarray, s: np.ndarray, chunk: int = 40_000) -> np.ndarray:
    n, q = h.shape
    if getattr(evaluator, "batched", False):
        parts = [evaluator(h[i:i + chunk], s[i:i + chunk]) for i in range(0, n, chunk)]
        return np.concatenate(parts, axis=0) if parts else np.empty((0, q, q))
    out = np.full((n, q, q), np.nan)
    for i in range(n):
        try:
            out[i] = evaluator(h[i], s[i]).entries
        except ValueError:
            pass
    return out


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------

@dataclass
class _Search:
    evaluator: Callable
    cond_cap: float
    evaluated: int = 0
    skipped: int = 0

    def best(self, axes: list[np.ndarray], q: int):
        """Exhaustive search over the product of ``axes`` (h_1..h_q, s_1..s_q).

        Returns the winning (h, s, objective) or None when all points are invalid.
        """
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.reshape(-1) for m in mesh], axis=-1)
        h, s = pts[:, :q], pts[:, q:]
        obj = _batch_objective(h, _evaluate(self.evaluator, h, s), self.cond_cap)
        self.evaluated += obj.size
        valid = np.isfinite(obj)
        self.skipped += int(obj.size - np.count_nonzero(valid))
        if not np.any(valid):
            return None
        # first maximum in grid order
        i = int(np.argmax(np.where(valid, obj, -np.inf)))
        return h[i].copy(), s[i].copy(), float(obj[i])


def _joint(search: _Search, hg, sg, q):
    return search.best(list(hg) + list(sg), q)


def _profile(search: _Search, hg, sg, q, start=None, sweeps: int = 2):
    if start is None:
        h = np.array([g[len(g) // 4] if len(g) > 1 else g[0] for g in hg])
        s = np.array([g[len(g) // 2] for g in sg])
        result = None
    else:
        h, s, _ = start
        h, s = h.copy(), s.copy()
        result = start
    for _ in range(sweeps):
        for k in range(q):
            axes = [np.array([x]) for x in h] + [np.array([x]) for x in s]
            axes[k] = hg[k]
            axes[q + k] = sg[k]
            found = search.best(axes, q)
            if found is None:
                continue
            if result is None or found[2] > result[2]:
                result = found
            h, s = result[0].copy(), result[1].copy()
    return result


def _refined_grid(grid: np.ndarray, winner: float, length: float) -> np.ndarray:
    vals = np.unique(grid)
    gaps = np.abs(vals - winner)
    gaps = gaps[gaps > 0]
    step = 0.5 * (gaps.min() if gaps.size else abs(winner))
    n = grid.size
    new = winner + step * (np.arange(n) - n // 2)
    keep = (new != 0.0) & (np.abs(new) < length)
    return new[keep]


def maximize(
    evaluator,
    config: OptimizerConfig,
    prior: PriorSpec,
) -> WwbResult:
    """Maximize ``trace(H G^-1 H)`` over the configured grids.

    Args:
        evaluator: Batched callable ``(h, s) -> G`` on ``(n, q)`` arrays
            (attribute ``batched = True``) or a scalar callable returning
            :class:`GMatrix` that raises ``ValueError`` at invalid points.
        config: Grids and strategy.
        prior: Prior, used for the default grid and support limits.

    Returns:
        :class:`WwbResult` at the best grid point.

    Raises:
        NoValidPointError: No grid point produced a usable G.
    """
    q = len(prior)
    hg = config.h_grids(prior)
    sg = [np.array(config.s_grid)] * q
    size = int(np.prod([g.size for g in hg])) * len(config.s_grid) ** q
    strategy = config.strategy
    if strategy == "auto":
        strategy = "joint" if size <= config.joint_cap or q == 1 else "profile"
    search = _Search(evaluator, config.cond_cap)
    found = _joint(search, hg, sg, q) if strategy == "joint" else _profile(search, hg, sg, q)
    if found is None:
        raise NoValidPointError("every grid point was invalid")
    if config.refine:
        lengths = [support_length(e) for e in prior.entries]
        rg = [_refined_grid(g, w, L) for g, w, L in zip(hg, found[0], lengths)]
        rsize = int(np.prod([g.size for g in rg])) * len(config.s_grid) ** q
        if strategy == "joint" and rsize <= max(config.joint_cap, size):
            cand = _joint(search, rg, sg, q)
        else:
            cand = _profile(search, rg, sg, q, start=found)
        if cand is not None and cand[2] > found[2]:
            found = cand
    h, s, obj = found
    if getattr(evaluator, "batched", False):
        gm = evaluator(h[None], s[None])[0]
        g = GMatrix(0.5 * (gm + gm.T), h, s)
    else:
        g = evaluator(h, s)
    bound = wwb_from_g(h, g, config.cond_cap)
    return WwbResult(bound, h, s, float(np.trace(bound)), g, search.evaluated, search.skipped)
