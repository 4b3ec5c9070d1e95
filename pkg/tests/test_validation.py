import inspect

import pytest

from wwbkit import closed_form, general
from wwbkit.validation import ORACLE_MANIFEST, SUITES, CheckResult, SuiteReport, run_suite

# dense reference implementations living next to the closed forms
REFERENCE_ONLY = {"general.zeta_dense"}


def _public_functions(module):
    name = module.__name__.split(".")[-1]
    return {
        f"{name}.{fn}"
        for fn, obj in inspect.getmembers(module, inspect.isfunction)
        if obj.__module__ == module.__name__ and not fn.startswith("_")
    }


class TestManifest:
    def test_every_closed_form_op_has_an_oracle(self):
        ops = (_public_functions(general) | _public_functions(closed_form)) - REFERENCE_ONLY
        missing = sorted(ops - set(ORACLE_MANIFEST))
        assert not missing, f"no oracle suite for {missing}"

    def test_manifest_entries_exist(self):
        mods = {"general": general, "closed_form": closed_form}
        for op, suites in ORACLE_MANIFEST.items():
            mod, fn = op.split(".")
            assert hasattr(mods[mod], fn), op
            assert suites and set(suites) <= set(SUITES), op

    def test_every_suite_used(self):
        used = {s for suites in ORACLE_MANIFEST.values() for s in suites}
        assert used == set(SUITES)


class TestReport:
    def test_pass_fail_logic(self):
        ok = CheckResult("a", 1e-12, 1e-10)
        bad = CheckResult("b", float("nan"), 1e-10)
        assert ok.passed and not bad.passed
        rep = SuiteReport("x", (ok, bad))
        assert not rep.passed and rep.n_passed == 1
        assert rep.lines()[-1].startswith("FAIL x: 1/2")

    def test_empty_suite_fails(self):
        assert not SuiteReport("x").passed

    def test_unknown_suite(self):
        with pytest.raises(KeyError):
            run_suite("appendix-z")


class TestSuites:
    @pytest.mark.parametrize("name", sorted(SUITES))
    def test_suite_passes(self, name):
        rep = run_suite(name, seed=123)
        assert rep.passed, "\n".join(rep.lines())

    def test_eta_mc_precision(self):
        # stochastic oracle: standard error below 1% of the value
        rep = run_suite("eta-mc", seed=5)
        for c in rep.checks:
            closed = float(c.detail.split()[0].split("=")[1])
            se = float(c.detail.split("+-")[1])
            assert se < 0.01 * closed, c
