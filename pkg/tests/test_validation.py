import logging

from ionbath.config import config_from_mapping
from ionbath.validation import (Check, check_config, check_fidelity_properties, check_lamb_dicke_presets,
                                check_liouvillian_equivalence, check_otto, check_semigroup, check_steady_states,
                                check_synthesis_invariants, format_report)

""" Tests for ionbath.validation
Test naming convention
test_MethodName_ExpectedBehavior_StateUnderTest
"""


def all_pass(checks):
    return all(check.status == "pass" for check in checks)


#------------------------
# check groups
#------------------------

def test_checkSemigroup_pass():
    assert all_pass(check_semigroup())


def test_checkLiouvillianEquivalence_pass():
    assert all_pass(check_liouvillian_equivalence())


def test_checkSteadyStates_pass_squeezedCoherentBound():
    checks = check_steady_states()
    assert all_pass(checks)
    displaced = next(check for check in checks if "squeezed coherent" in check.name)
    assert displaced.bound == 1e-5


def test_checkLambDickePresets_pass_sixPresets():
    checks = check_lamb_dicke_presets()
    assert len(checks) == 6
    assert all_pass(checks)


def test_checkFidelityProperties_pass():
    assert all_pass(check_fidelity_properties())


def test_checkOtto_pass():
    checks = check_otto()
    assert all_pass(checks)
    assert checks[-1].residual == 0


def test_checkSynthesisInvariants_pass():
    checks = check_synthesis_invariants()
    assert all_pass(checks)
    assert any(check.name.startswith("recursion refused at dim 40") for check in checks)


#------------------------
# user configs
#------------------------

def test_checkConfig_warnings_largeEpsilonSqueezingRecursion(caplog):
    config = config_from_mapping({
        "dim": 10,
        "channels": [{"preset": "squeezed", "r": 0.5, "epsilon": 0.5, "lamb_dicke_limit": True}],
        "initial_state": {"kind": "number", "n": 1},
        "n_stages": 3,
        "stepper": "recursion",
    })
    with caplog.at_level(logging.WARNING):
        checks = check_config(config)
    assert [check.status for check in checks] == ["warn", "warn"]
    assert all(check.passed for check in checks)
    assert [check.name for check in checks] == ["config stepper stability", "config epsilon guard"]
    assert "config stepper stability" in caplog.text


def test_checkConfig_positive_largeEpsilonSqueezingExponential(caplog):
    config = config_from_mapping({
        "dim": 10,
        "channels": [{"preset": "squeezed", "r": 0.5, "epsilon": 0.5, "lamb_dicke_limit": True}],
        "initial_state": {"kind": "number", "n": 1},
        "n_stages": 3,
    })
    with caplog.at_level(logging.WARNING):
        checks = check_config(config)
    assert [check.status for check in checks] == ["pass", "warn"]
    assert "config epsilon guard" in caplog.text


def test_checkConfig_pass_shippedCooling():
    config = config_from_mapping({"dim": 10, "channels": [{"preset": "cooling"}],
                                  "initial_state": {"kind": "number", "n": 2}, "n_stages": 10})
    assert all_pass(check_config(config))


#------------------------
# report
#------------------------

def test_formatReport_countsFailures_mixedChecks():
    checks = [Check("first", "pass", 0.0, 1.0), Check("second", "fail", 2.0, 1.0), Check("third", "warn", 2.0, 1.0)]
    report = format_report(checks)
    lines = report.splitlines()
    assert lines[0].startswith("PASS  first")
    assert lines[1].startswith("FAIL  second")
    assert lines[-1] == "2 of 3 checks passed"
