"""Scenario files: parsing, validation and serialization.

A scenario is a JSON document. See ``docs/scenario-schema.md`` for the
full schema; the shipped files under ``scenarios/`` are worked examples.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .geometry import ArrayGeometry, ula, uca, v_shaped
from .models import Conditional, Gaussian, PriorSpec, Uniform, Unconditional, constant_waveform
from .optimizer import LogGrid, OptimizerConfig

DEFAULT_MAP_GRID = 2048
U64_MAX = 2 ** 64 - 1


class ScenarioError(ValueError):
    """Schema or invariant violation; the message starts with the field path."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything needed for a bound sweep or an MSE benchmark."""

    geometry: ArrayGeometry
    model: Any
    prior: PriorSpec
    theta_true: np.ndarray
    snr_db: tuple
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    trials: int = 100
    seed: int = 0
    map_grid: int = DEFAULT_MAP_GRID
    name: str = "scenario"

    def __post_init__(self) -> None:
        th = np.atleast_1d(np.asarray(self.theta_true, dtype=float)).copy()
        th.setflags(write=False)
        object.__setattr__(self, "theta_true", th)
        object.__setattr__(self, "snr_db", tuple(float(x) for x in self.snr_db))
        if not self.snr_db:
            raise ScenarioError("snr_db", "sweep must be non-empty")
        if th.size != len(self.prior):
            raise ScenarioError("theta_true", "needs one entry per prior parameter")
        if th.size != self.geometry.n_params and not (th.size == 2 and self.geometry.is_linear):
            raise ScenarioError("theta_true", "dimension does not match the geometry")
        if not self.prior.contains(th):
            raise ScenarioError("theta_true", "lies outside the prior support")
        if self.trials < 1:
            raise ScenarioError("trials", "must be >= 1")
        if not 0 <= self.seed <= U64_MAX:
            raise ScenarioError("seed", "must be an unsigned 64-bit integer")
        if self.map_grid < 2:
            raise ScenarioError("mse.grid", "must be >= 2")

    @property
    def q(self) -> int:
        return int(self.theta_true.size)

    @property
    def param_names(self) -> tuple:
        return ("u", "v")[: self.q] if self.q <= 2 else tuple(f"p{i}" for i in range(self.q))

    def model_at(self, snr_db: float):
        """Signal model rescaled to ``snr_db``."""
        return self.model.with_snr_db(snr_db)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.geometry == other.geometry
            and self.model == other.model
            and self.prior == other.prior
            and np.array_equal(self.theta_true, other.theta_true)
            and self.snr_db == other.snr_db
            and self.optimizer == other.optimizer
            and (self.trials, self.seed, self.map_grid, self.name)
            == (other.trials, other.seed, other.map_grid, other.name)
        )

    __hash__ = None


# ---------------------------------------------------------------------------
# Parsing helpers
# ---------------------------------------------------------------------------

def _get(node: dict, key: str, path: str, default=...):
    if key in node:
        return node[key]
    if default is ...:
        raise ScenarioError(f"{path}.{key}" if path else key, "required field is missing")
    return default


def _num(val, path: str, positive: bool = False) -> float:
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ScenarioError(path, f"expected a number, got {val!r}")
    val = float(val)
    if not np.isfinite(val):
        raise ScenarioError(path, "must be finite")
    if positive and val <= 0:
        raise ScenarioError(path, "must be > 0")
    return val


def _int(val, path: str, minimum: int | None = None) -> int:
    if isinstance(val, bool) or not isinstance(val, int):
        raise ScenarioError(path, f"expected an integer, got {val!r}")
    if minimum is not None and val < minimum:
        raise ScenarioError(path, f"must be >= {minimum}")
    return int(val)


def _obj(val, path: str) -> dict:
    if not isinstance(val, dict):
        raise ScenarioError(path, "expected an object")
    return val


def _parse_geometry(node, path: str = "geometry") -> ArrayGeometry:
    node = _obj(node, path)
    kind = _get(node, "type", path)
    name = node.get("name")
    spacing = _num(node.get("spacing", 0.5), f"{path}.spacing", positive=True)
    try:
        if kind == "ula":
            return ula(_int(_get(node, "sensors", path), f"{path}.sensors", 1), spacing, name)
        if kind == "uca":
            return uca(_int(_get(node, "sensors", path), f"{path}.sensors", 2), spacing, name)
        if kind == "v_shaped":
            per = _int(_get(node, "per_branch", path), f"{path}.per_branch", 1)
            delta = _num(_get(node, "delta_deg", path), f"{path}.delta_deg")
            return v_shaped(per, delta, spacing, name)
        if kind == "custom":
            sensors = _get(node, "sensors", path)
            if not isinstance(sensors, list) or not sensors:
                raise ScenarioError(f"{path}.sensors", "expected a non-empty list of [dx, dy] pairs")
            pos = []
            for i, pair in enumerate(sensors):
                p = f"{path}.sensors[{i}]"
                if not isinstance(pair, list) or len(pair) != 2:
                    raise ScenarioError(p, "expected [dx, dy]")
                pos.append([_num(pair[0], p), _num(pair[1], p)])
            return ArrayGeometry(np.array(pos), name or "custom")
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(path, str(exc)) from None
    raise ScenarioError(f"{path}.type", f"unknown geometry type {kind!r}")


def _parse_complex_list(val, path: str) -> np.ndarray:
    if not isinstance(val, list) or not val:
        raise ScenarioError(path, "expected a non-empty list")
    out = []
    for i, x in enumerate(val):
        p = f"{path}[{i}]"
        if isinstance(x, list):
            if len(x) != 2:
                raise ScenarioError(p, "complex samples are [re, im]")
            out.append(complex(_num(x[0], p), _num(x[1], p)))
        else:
            out.append(complex(_num(x, p), 0.0))
    return np.array(out)


def _parse_model(node, path: str = "model"):
    node = _obj(node, path)
    kind = _get(node, "type", path)
    sigma_n2 = _num(node.get("sigma_n2", 1.0), f"{path}.sigma_n2", positive=True)
    if kind == "unconditional":
        t = _int(_get(node, "snapshots", path), f"{path}.snapshots", 1)
        s2 = _num(node.get("sigma_s2", sigma_n2), f"{path}.sigma_s2", positive=True)
        return Unconditional(s2, sigma_n2, t)
    if kind == "conditional":
        if "waveform" in node:
            wave = _parse_complex_list(node["waveform"], f"{path}.waveform")
            if "snapshots" in node and _int(node["snapshots"], f"{path}.snapshots", 1) != wave.size:
                raise ScenarioError(f"{path}.snapshots", "disagrees with the waveform length")
        else:
            t = _int(_get(node, "snapshots", path), f"{path}.snapshots", 1)
            wave = constant_waveform(t)
        try:
            return Conditional(wave, sigma_n2)
        except ValueError as exc:
            raise ScenarioError(f"{path}.waveform", str(exc)) from None
    raise ScenarioError(f"{path}.type", f"unknown model type {kind!r}")


def _parse_prior(node, q: int, path: str = "prior") -> PriorSpec:
    if node is None:
        return PriorSpec.unit_uniform(q)
    if not isinstance(node, list) or not node:
        raise ScenarioError(path, "expected a list with one entry per parameter")
    entries = []
    for i, e in enumerate(node):
        p = f"{path}[{i}]"
        e = _obj(e, p)
        kind = _get(e, "type", p)
        if kind == "uniform":
            a = _num(e.get("a", -1.0), f"{p}.a")
            b = _num(e.get("b", 1.0), f"{p}.b")
            if not a < b:
                raise ScenarioError(f"{p}.a", f"uniform prior needs a < b (got a={a}, b={b})")
            entries.append(Uniform(a, b))
        elif kind == "gaussian":
            entries.append(
                Gaussian(_num(e.get("mu", 0.0), f"{p}.mu"), _num(_get(e, "sigma2", p), f"{p}.sigma2", positive=True))
            )
        else:
            raise ScenarioError(f"{p}.type", f"unknown prior type {kind!r}")
    return PriorSpec(tuple(entries))


def _parse_theta(node, geometry: ArrayGeometry, path: str = "theta_true") -> np.ndarray:
    """Direction cosines from ``u``/``v`` or from angles in degrees."""
    if node is None:
        return np.zeros(geometry.n_params)
    if isinstance(node, list):
        return np.array([_num(x, f"{path}[{i}]") for i, x in enumerate(node)])
    node = _obj(node, path)
    if "u" in node:
        u = _num(node["u"], f"{path}.u")
        if "v" in node:
            return np.array([u, _num(node["v"], f"{path}.v")])
        return np.array([u]) if geometry.is_linear else np.array([u, 0.0])
    if "elevation_deg" in node:
        el = np.deg2rad(_num(node["elevation_deg"], f"{path}.elevation_deg"))
        if geometry.is_linear and "azimuth_deg" not in node:
            return np.array([np.sin(el)])
        az = np.deg2rad(_num(node.get("azimuth_deg", 0.0), f"{path}.azimuth_deg"))
        return np.array([np.sin(el) * np.cos(az), np.sin(el) * np.sin(az)])
    raise ScenarioError(path, "give u (and v) or elevation_deg (and azimuth_deg)")


def _parse_snr(node, path: str = "snr_db") -> tuple:
    if isinstance(node, list):
        if not node:
            raise ScenarioError(path, "sweep must be non-empty")
        return tuple(_num(x, f"{path}[{i}]") for i, x in enumerate(node))
    node = _obj(node, path)
    start = _num(_get(node, "start", path), f"{path}.start")
    stop = _num(_get(node, "stop", path), f"{path}.stop")
    step = _num(_get(node, "step", path), f"{path}.step", positive=True)
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    if n < 1:
        raise ScenarioError(path, "sweep must be non-empty")
    return tuple(float(start + i * step) for i in range(n))


def parse_h_grid(node, path: str = "optimizer.h_grid"):
    if node is None:
        return None
    if isinstance(node, list):
        return tuple(_num(x, f"{path}[{i}]") for i, x in enumerate(node))
    node = _obj(node, path)
    try:
        return LogGrid(
            _num(_get(node, "min", path), f"{path}.min", positive=True),
            _num(_get(node, "max", path), f"{path}.max", positive=True),
            _int(_get(node, "count", path), f"{path}.count", 1),
        )
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(path, str(exc)) from None


def _parse_optimizer(node, path: str = "optimizer") -> OptimizerConfig:
    if node is None:
        return OptimizerConfig()
    node = _obj(node, path)
    s_grid = node.get("s_grid", [0.5])
    if not isinstance(s_grid, list):
        raise ScenarioError(f"{path}.s_grid", "expected a list")
    refine = node.get("refine", False)
    if not isinstance(refine, bool):
        raise ScenarioError(f"{path}.refine", "expected true or false")
    try:
        return OptimizerConfig(
            h_grid=parse_h_grid(node.get("h_grid"), f"{path}.h_grid"),
            s_grid=tuple(_num(x, f"{path}.s_grid[{i}]") for i, x in enumerate(s_grid)),
            strategy=node.get("strategy", "auto"),
            refine=refine,
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(path, str(exc)) from None


def scenario_from_dict(doc: dict) -> Scenario:
    """Build and validate a :class:`Scenario` from a parsed document."""
    doc = _obj(doc, "<root>")
    geometry = _parse_geometry(_get(doc, "geometry", ""))
    model = _parse_model(_get(doc, "model", ""))
    theta = _parse_theta(doc.get("theta_true"), geometry)
    prior = _parse_prior(doc.get("prior"), theta.size)
    mse = _obj(doc.get("mse", {}), "mse")
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ScenarioError("seed", "expected an integer")
    return Scenario(
        geometry=geometry,
        model=model,
        prior=prior,
        theta_true=theta,
        snr_db=_parse_snr(_get(doc, "snr_db", "")),
        optimizer=_parse_optimizer(doc.get("optimizer")),
        trials=_int(doc.get("trials", 100), "trials"),
        seed=seed,
        map_grid=_int(mse.get("grid", DEFAULT_MAP_GRID), "mse.grid"),
        name=str(doc.get("name", "scenario")),
    )


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    """Parse a JSON scenario document.

    Args:
        text: Document contents.
        source: Name used in error messages.

    Returns:
        Validated :class:`Scenario`.

    Raises:
        ScenarioError: Malformed JSON (with line and column) or invalid fields.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}:{exc.lineno}:{exc.colno}", exc.msg) from None
    return scenario_from_dict(doc)


def load_scenario(path: str | Path) -> Scenario:
    """Read and parse a scenario file."""
    path = Path(path)
    return parse_scenario(path.read_text(), str(path))


def load_scenario_dict(path: str | Path) -> dict:
    """Raw document of a scenario file (for edits such as the opening-angle sweep)."""
    path = Path(path)
    text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _model_dict(model) -> dict:
    if isinstance(model, Unconditional):
        return {
            "type": "unconditional",
            "sigma_s2": model.sigma_s2,
            "sigma_n2": model.sigma_n2,
            "snapshots": model.snapshots,
        }
    wave = model.waveform[:, 0]
    return {
        "type": "conditional",
        "sigma_n2": model.sigma_n2,
        "waveform": [[float(z.real), float(z.imag)] for z in wave],
    }


def _prior_list(prior: PriorSpec) -> list:
    out = []
    for e in prior.entries:
        if isinstance(e, Uniform):
            out.append({"type": "uniform", "a": e.a, "b": e.b})
        else:
            out.append({"type": "gaussian", "mu": e.mu, "sigma2": e.sigma2})
    return out


def _optimizer_dict(cfg: OptimizerConfig) -> dict:
    if cfg.h_grid is None:
        hg = None
    elif isinstance(cfg.h_grid, LogGrid):
        hg = {"min": cfg.h_grid.h_min, "max": cfg.h_grid.h_max, "count": cfg.h_grid.count}
    else:
        hg = list(cfg.h_grid)
    return {"h_grid": hg, "s_grid": list(cfg.s_grid), "strategy": cfg.strategy, "refine": cfg.refine}


def scenario_to_dict(sc: Scenario) -> dict:
    """Lossless document form; geometry is written as explicit sensor positions."""
    if sc.model.kind == "conditional" and sc.model.n_sources != 1:
        raise ValueError("scenario files describe one source")
    theta = {"u": float(sc.theta_true[0])}
    if sc.q == 2:
        theta["v"] = float(sc.theta_true[1])
    return {
        "name": sc.name,
        "geometry": {
            "type": "custom",
            "name": sc.geometry.name,
            "sensors": [[float(x), float(y)] for x, y in sc.geometry.sensors],
        },
        "model": _model_dict(sc.model),
        "prior": _prior_list(sc.prior),
        "theta_true": theta,
        "snr_db": list(sc.snr_db),
        "optimizer": _optimizer_dict(sc.optimizer),
        "trials": sc.trials,
        "seed": sc.seed,
        "mse": {"grid": sc.map_grid},
    }


def serialize_scenario(sc: Scenario) -> str:
    """JSON text that :func:`parse_scenario` maps back to an equal scenario."""
    return json.dumps(scenario_to_dict(sc), indent=2)
