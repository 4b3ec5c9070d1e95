import json

import numpy as np
import pytest

from wwbkit.models import Conditional, Gaussian, Unconditional
from wwbkit.optimizer import LogGrid
from wwbkit.scenario import (
    ScenarioError,
    load_scenario,
    parse_scenario,
    scenario_from_dict,
    serialize_scenario,
)


def _doc(**over):
    doc = {
        "geometry": {"type": "uca", "sensors": 8},
        "model": {"type": "unconditional", "snapshots": 20},
        "snr_db": [-10, 0],
    }
    doc.update(over)
    return doc


class TestParsing:
    def test_minimal(self):
        sc = scenario_from_dict(_doc())
        assert sc.q == 2 and sc.param_names == ("u", "v")
        assert sc.prior.is_unit_uniform()
        assert isinstance(sc.model, Unconditional) and sc.model.snapshots == 20
        assert sc.snr_db == (-10.0, 0.0)

    def test_angles_to_direction_cosines(self):
        sc = scenario_from_dict(_doc(theta_true={"elevation_deg": 30.0, "azimuth_deg": 60.0}))
        np.testing.assert_allclose(sc.theta_true, [0.5 * 0.5, 0.5 * np.sqrt(3) / 2])

    def test_snr_range(self):
        sc = scenario_from_dict(_doc(snr_db={"start": -10, "stop": 0, "step": 2.5}))
        np.testing.assert_allclose(sc.snr_db, [-10, -7.5, -5, -2.5, 0])

    def test_conditional_waveform(self):
        sc = scenario_from_dict(_doc(model={"type": "conditional", "waveform": [[1, 0], [0, -1]]}))
        assert isinstance(sc.model, Conditional)
        np.testing.assert_array_equal(sc.model.waveform[:, 0], [1, -1j])

    def test_optimizer_and_prior(self):
        sc = scenario_from_dict(
            _doc(
                geometry={"type": "ula", "sensors": 4},
                prior=[{"type": "gaussian", "mu": 0.1, "sigma2": 0.04}],
                theta_true=[0.1],
                optimizer={"h_grid": {"min": 0.01, "max": 1.5, "count": 20}, "s_grid": [0.4, 0.5], "refine": True},
            )
        )
        assert isinstance(sc.prior[0], Gaussian)
        assert sc.optimizer.h_grid == LogGrid(0.01, 1.5, 20)
        assert sc.optimizer.refine and sc.optimizer.s_grid == (0.4, 0.5)

    @pytest.mark.parametrize(
        "over, path",
        [
            (dict(geometry={"type": "hexagon"}), "geometry.type"),
            (dict(model={"type": "unconditional"}), "model"),
            (dict(snr_db=[]), "snr_db"),
            (dict(prior=[{"type": "uniform", "a": 1, "b": -1}] * 2), "prior[0].a"),
            (dict(theta_true={"u": 1.5, "v": 0}), "theta_true"),
            (dict(trials=0), "trials"),
            (dict(seed=-1), "seed"),
            (dict(optimizer={"s_grid": [1.2]}), "optimizer"),
        ],
    )
    def test_errors_name_the_field(self, over, path):
        with pytest.raises(ScenarioError) as exc:
            scenario_from_dict(_doc(**over))
        assert str(exc.value).startswith(path)

    def test_json_error_location(self):
        with pytest.raises(ScenarioError) as exc:
            parse_scenario('{"geometry": {,}}', "bad.json")
        assert str(exc.value).startswith("bad.json:1:")


class TestRoundTrip:
    def test_serialize_parse(self):
        sc = scenario_from_dict(
            _doc(
                model={"type": "conditional", "waveform": [[1, 0.5], [0.2, -1]]},
                optimizer={"h_grid": [0.1, -0.3], "strategy": "profile"},
                seed=2 ** 63,
                mse={"grid": 512},
            )
        )
        back = parse_scenario(serialize_scenario(sc))
        assert back == sc
        assert back.geometry == sc.geometry

    def test_bundled_scenarios_load(self, scenario_dir):
        files = sorted(scenario_dir.glob("*.json"))
        assert files
        for f in files:
            sc = load_scenario(f)
            assert parse_scenario(serialize_scenario(sc)) == sc
            json.loads(f.read_text())
