import logging

import numpy as np
import pytest

from ionbath.reset import ElectronicState, fit_decay_rate, full_reset, reset_generator, reset_step, reset_time
from ionbath.schemas import ResetParams

""" Tests for ionbath.reset
Test naming convention
test_MethodName_ExpectedBehavior_StateUnderTest
"""


@pytest.fixture(scope="module")
def params():
    return ResetParams(omega_tilde=0.05, gamma30=1.0)


@pytest.fixture(scope="module")
def excited_trace(params):
    state = ElectronicState.from_populations([0.0, 1.0, 0.0, 0.0])
    return reset_step(state, 1, params, 8 / params.gamma_eff)


#------------------------
# single reset step
#------------------------

def test_resetStep_effectiveRate_omega005(params, excited_trace):
    assert params.gamma_eff == pytest.approx(0.01)
    assert fit_decay_rate(excited_trace) == pytest.approx(params.gamma_eff, rel=0.05)


@pytest.mark.parametrize("omega_tilde", [0.02, 0.05])
def test_resetStep_effectiveRate_adiabaticRegime(omega_tilde):
    params = ResetParams(omega_tilde=omega_tilde, gamma30=1.0)
    trace = reset_step(ElectronicState.from_populations([0.0, 1.0, 0.0, 0.0]), 1, params, 8 / params.gamma_eff)
    assert fit_decay_rate(trace) == pytest.approx(params.gamma_eff, rel=0.05)


def test_resetStep_rateDeviates_regimeBoundary(caplog):
    with caplog.at_level(logging.WARNING):
        params = ResetParams(omega_tilde=0.2, gamma30=1.0)
    trace = reset_step(ElectronicState.from_populations([0.0, 1.0, 0.0, 0.0]), 1, params, 8 / params.gamma_eff)
    deviation = abs(fit_decay_rate(trace) - params.gamma_eff) / params.gamma_eff
    assert deviation > 0.05
    assert "only approximate" in caplog.text


def test_resetStep_coherenceFrozen_groundAndSpectatorLevel(params):
    matrix = np.diag([0.5, 0.0, 0.5, 0.0]).astype(complex)
    matrix[0, 2] = matrix[2, 0] = 0.3
    trace = reset_step(ElectronicState(matrix), 1, params, 20.0)
    for state in trace.states:
        assert abs(state.matrix[0, 2] - 0.3) <= 1e-10


def test_resetGenerator_noCoherenceDrift_groundAndSpectatorLevel(params):
    # column-stacked index of rho_02
    row = reset_generator(1, params)[0 + 2 * 4]
    assert np.max(np.abs(row)) <= 1e-10


def test_resetStep_nearlyConstant_vanishingDrive():
    params = ResetParams(omega_tilde=1e-6, gamma30=1.0)
    state = ElectronicState.from_populations([0.0, 0.5, 0.5, 0.0])
    final = reset_step(state, 1, params, 10.0).final
    np.testing.assert_allclose(final.matrix, state.matrix, atol=1e-9)


def test_resetStep_tracePreserved_longRun(excited_trace):
    for state in excited_trace.states:
        assert state.trace_error <= 1e-8
        assert state.hermiticity_error <= 1e-10


def test_resetStep_untouchedLevel_targetLevel1(params):
    state = ElectronicState.from_populations([0.0, 0.5, 0.5, 0.0])
    trace = reset_step(state, 1, params, 4 / params.gamma_eff)
    assert np.max(np.abs(trace.population(2) - 0.5)) < 1e-6


def test_resetStep_samplesStartAtInitialState(params):
    state = ElectronicState.from_populations([0.0, 0.5, 0.5, 0.0])
    trace = reset_step(state, 2, params, 10.0, record_every=100)
    assert trace.times[0] == 0.0
    assert trace.times[-1] == pytest.approx(10.0)
    np.testing.assert_allclose(trace.states[0].matrix, state.matrix)
    assert len(trace.states) == 21


def test_resetStep_ERROR_tooLargeStep(params):
    with pytest.raises(ValueError):
        reset_step(ElectronicState.from_populations([0, 1, 0, 0]), 1, params, 10.0, dt=0.05)


def test_resetGenerator_ERROR_auxiliaryTarget(params):
    with pytest.raises(ValueError):
        reset_generator(3, params)


def test_electronicState_ERROR_wrongLevelCount():
    with pytest.raises(ValueError):
        ElectronicState(np.eye(3) / 3)


def test_fitDecayRate_ERROR_noSamplesInWindow(params):
    state = ElectronicState.from_populations([1.0, 0.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        fit_decay_rate(reset_step(state, 1, params, 10.0))


#------------------------
# two-step reset
#------------------------

def test_fullReset_unchanged_groundState(params):
    ground = ElectronicState.from_populations([1.0, 0.0, 0.0, 0.0])
    np.testing.assert_allclose(full_reset(ground, params).matrix, ground.matrix, atol=1e-12)


def test_fullReset_groundPopulation_mixedExcitedLevels(params):
    state = ElectronicState.from_populations([0.0, 0.5, 0.5, 0.0])
    assert full_reset(state, params).populations()[0] >= 0.999


def test_resetTime_quarters_doubledDrive():
    slow = reset_time(ResetParams(omega_tilde=0.05))
    fast = reset_time(ResetParams(omega_tilde=0.1))
    assert slow / fast == pytest.approx(4.0, rel=0.1)


def test_resetParams_ERROR_driveAboveAdiabaticRange():
    with pytest.raises(ValueError):
        ResetParams(omega_tilde=0.3, gamma30=1.0)


def test_resetParams_ERROR_zeroDrive():
    with pytest.raises(ValueError):
        ResetParams(omega_tilde=0.0, gamma30=1.0)
