import logging

import numpy as np
import pytest

from ionbath.fock import FockSpace, annihilation
from ionbath.lasers import (EngineeredChannel, anchor_coefficient, channel_preset, displacement_ratio,
                            engineering_operator, leading_order_operators, rescale_channel, sideband_operator,
                            squeeze_ratio)
from ionbath.schemas import ChannelSpec, LaserLine

""" Tests for ionbath.lasers
Test naming convention
test_MethodName_ExpectedBehavior_StateUnderTest
"""

ETA = 0.05


#------------------------
# sideband operators
#------------------------

def test_sidebandOperator_leadingEntry_redSideband(space10):
    d = sideband_operator(space10, 1, ETA)
    assert d[0, 1] == pytest.approx(0.0499376j, abs=1e-7)
    assert d[0, 1] == pytest.approx(1j * ETA * np.exp(-ETA ** 2 / 2), abs=1e-15)


def test_sidebandOperator_identity_carrierSmallEta(space10):
    np.testing.assert_allclose(sideband_operator(space10, 0, 1e-4), np.eye(10), atol=1e-6)


def test_sidebandOperator_leadingEntry_secondSideband(space10):
    d = sideband_operator(space10, 2, ETA)
    assert d[0, 2].real == pytest.approx(-np.exp(-ETA ** 2 / 2) * ETA ** 2 / np.sqrt(2), rel=1e-12)
    assert d[0, 2].real == pytest.approx(-0.0017655586, abs=1e-10)
    assert d[0, 2].imag == pytest.approx(0.0, abs=1e-15)


def test_sidebandOperator_adjointWithSign_blueSideband(space10):
    red = sideband_operator(space10, 1, ETA)
    np.testing.assert_allclose(sideband_operator(space10, -1, ETA), -red.conj().T, atol=1e-15)


def test_sidebandOperator_lambDickeLimit_redSideband(space10):
    d = sideband_operator(space10, 1, ETA)
    target = 1j * ETA * annihilation(space10)
    assert np.max(np.abs(d - target)) <= 5 * ETA ** 2 * np.max(np.abs(target))


def test_sidebandOperator_ERROR_orderAboveFour(space10):
    with pytest.raises(ValueError):
        sideband_operator(space10, 5, ETA)


def test_sidebandOperator_ERROR_etaOutOfRange(space10):
    with pytest.raises(ValueError):
        sideband_operator(space10, 1, 0.6)


def test_engineeringOperator_scaledSideband_singleLine(space10):
    k = engineering_operator(space10, [LaserLine(m=1, rabi_ratio=0.3)])
    np.testing.assert_allclose(k, 0.3 * sideband_operator(space10, 1, ETA), atol=1e-15)


def test_engineeringOperator_carrierShift_redPlusCarrier(space10):
    k = engineering_operator(space10, [LaserLine(m=1, rabi_ratio=1.0), LaserLine(m=0, rabi_ratio=0.024)])
    target = 1j * ETA * annihilation(space10) + 0.024 * np.eye(10)
    assert np.max(np.abs(k - target)) < 5 * ETA ** 2 * np.max(np.abs(target))


#------------------------
# rescaling
#------------------------

def test_rescaleChannel_epsilon_standardPulseArea(space10):
    channel = rescale_channel(space10, channel_preset("cooling", eta=ETA, pulse_area=4.5)[0])
    assert channel.epsilon == pytest.approx(4.5 ** 2 * ETA ** 2 * np.exp(-ETA ** 2), rel=1e-12)
    assert channel.epsilon == pytest.approx(0.0504986, abs=1e-7)


def test_rescaleChannel_unitLeadingEntry_cooling(space10):
    channel = rescale_channel(space10, channel_preset("cooling")[0])
    assert channel.k_prime[0, 1] == pytest.approx(1.0, abs=1e-15)


def test_rescaleChannel_squeezeRatio_squeezedPreset(space10):
    spec = channel_preset("squeezed", r=np.arctanh(0.11))[0]
    assert spec.lines[1].rabi_ratio == pytest.approx(0.11, abs=1e-12)
    channel = rescale_channel(space10, spec)
    assert channel.k_prime[1, 0] == pytest.approx(0.11, abs=1e-3)


def test_rescaleChannel_warning_largeEpsilon(space10, caplog):
    with caplog.at_level(logging.WARNING):
        channel = rescale_channel(space10, channel_preset("cooling", pulse_area=10.0)[0], "cooling")
    assert channel.epsilon > 0.1
    assert "no longer perturbative" in caplog.text


def test_anchorCoefficient_ERROR_carrierAnchor():
    spec = ChannelSpec(lines=[LaserLine(m=0, rabi_ratio=1.0)], tau_r_omega_r=1.0)
    with pytest.raises(ValueError):
        anchor_coefficient(spec)


def test_engineeredChannel_ERROR_negativeEpsilon(space10):
    with pytest.raises(ValueError):
        EngineeredChannel(annihilation(space10), -0.1)


def test_engineeredChannel_ERROR_nonSquareOperator():
    with pytest.raises(ValueError):
        EngineeredChannel(np.ones((2, 3)), 0.1)


#------------------------
# presets
#------------------------

def test_channelPreset_epsilonRatio_thermalPair(space10):
    first, second = [rescale_channel(space10, spec) for spec in channel_preset("thermal_pair", nbar=0.25)]
    assert first.epsilon / second.epsilon == pytest.approx(5.0, rel=1e-12)


def test_channelPreset_singleRedLine_cooling():
    specs = channel_preset("cooling")
    assert len(specs) == 1
    assert [(line.m, line.rabi_ratio) for line in specs[0].lines] == [(1, 1.0)]


def test_channelPreset_ratios_squeezedCoherent():
    spec = channel_preset("squeezed_coherent", r=0.11, alpha=0.48j)[0]
    ratios = [line.rabi_ratio for line in spec.lines]
    np.testing.assert_allclose(ratios, [1.0, np.tanh(0.11), 0.48 * ETA], atol=1e-15)
    assert [line.m for line in spec.lines] == [1, -1, 0]


def test_channelPreset_lambDickeConsistency_allPresets(space10):
    cases = [("cooling", {}), ("heating", {}), ("coherent", {"alpha": 0.6j}), ("squeezed", {"r": 0.11}),
             ("squeezed_coherent", {"r": 0.11, "alpha": 0.48j}), ("thermal_pair", {"nbar": 0.25})]
    for kind, params in cases:
        specs = channel_preset(kind, **params)
        targets = leading_order_operators(space10, kind, r=params.get("r"), alpha=params.get("alpha"))
        for spec, target in zip(specs, targets):
            computed = rescale_channel(space10, spec).k_prime
            assert np.max(np.abs(computed - target)) <= 5 * ETA ** 2 * np.max(np.abs(target)), kind


def test_channelPreset_ERROR_unknownKind():
    with pytest.raises(ValueError):
        channel_preset("lasing")


def test_channelPreset_ERROR_thermalPairWithoutNbar():
    with pytest.raises(ValueError):
        channel_preset("thermal_pair")


def test_displacementRatio_ERROR_realAlpha():
    with pytest.raises(ValueError):
        displacement_ratio(0.4)


def test_squeezeRatio_ERROR_negativeR():
    with pytest.raises(ValueError):
        squeeze_ratio(-0.1)


def test_leadingOrderOperators_ERROR_unknownKind():
    with pytest.raises(ValueError):
        leading_order_operators(FockSpace(4), "lasing")
