"""Weiss-Weinstein bounds for direction-of-arrival estimation with sensor arrays.

The package evaluates the bound for planar and linear arrays under the
unconditional (random source) and conditional (known waveform) Gaussian
observation models, either through a general eta-function engine or through
closed forms, and benchmarks it against a Monte Carlo MAP estimator.
"""

from .geometry import ArrayGeometry, steering_matrix, steering_vector, uca, ula, v_shaped
from .models import (
    Conditional,
    Gaussian,
    PriorSpec,
    Unconditional,
    Uniform,
    constant_waveform,
)
from .general import EtaArgs, GMatrix, InvalidRegionError, g_matrix, make_log_eta
from .closed_form import (
    PlanarBoundInputs,
    linear_cwwb,
    linear_uwwb,
    planar_g_cond,
    planar_g_uncond,
)
from .optimizer import LogGrid, NoValidPointError, OptimizerConfig, WwbResult, make_evaluator, maximize
from .scenario import Scenario, ScenarioError, load_scenario, parse_scenario
from .sweep import bound_sweep, scenario_bound
from .bench import map_estimate, mse_sweep, run_trials

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry",
    "Conditional",
    "EtaArgs",
    "GMatrix",
    "Gaussian",
    "InvalidRegionError",
    "LogGrid",
    "NoValidPointError",
    "OptimizerConfig",
    "PlanarBoundInputs",
    "PriorSpec",
    "Scenario",
    "ScenarioError",
    "Unconditional",
    "Uniform",
    "WwbResult",
    "bound_sweep",
    "constant_waveform",
    "g_matrix",
    "linear_cwwb",
    "linear_uwwb",
    "load_scenario",
    "make_evaluator",
    "make_log_eta",
    "map_estimate",
    "maximize",
    "mse_sweep",
    "parse_scenario",
    "planar_g_cond",
    "planar_g_uncond",
    "run_trials",
    "scenario_bound",
    "steering_matrix",
    "steering_vector",
    "uca",
    "ula",
    "v_shaped",
]
