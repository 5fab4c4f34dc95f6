import logging
import os

import pytest
from pydantic import ValidationError

from ionbath.config import config_from_mapping, load_config, resolve_output_path
from ionbath.errors import ConfigError
from ionbath.schemas import ChannelConfig, ComplexValue, LaserLine, OttoParams, ResetParams, StateSpec

""" Tests for ionbath.config and ionbath.schemas
Test naming convention
test_MethodName_ExpectedBehavior_StateUnderTest
"""


def write_config(tmp_path, text, name="experiment.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


#------------------------
# schema types
#------------------------

def test_complexValue_parsed_yamlForms():
    assert ComplexValue.validate([0.0, 0.6]) == 0.6j
    assert ComplexValue.validate("0.48j") == 0.48j
    assert ComplexValue.validate("0.1 + 0.2j") == complex(0.1, 0.2)
    assert ComplexValue.validate(0.5) == complex(0.5, 0.0)


def test_complexValue_ERROR_boolean():
    with pytest.raises(TypeError):
        ComplexValue.validate(True)


def test_complexValue_ERROR_threeComponents():
    with pytest.raises(ValueError):
        ComplexValue.validate([1.0, 2.0, 3.0])


def test_laserLine_ERROR_sidebandOrderFive():
    with pytest.raises(ValidationError):
        LaserLine(m=5, rabi_ratio=1.0)


def test_laserLine_ERROR_floatSidebandOrder():
    with pytest.raises(ValidationError):
        LaserLine(m=1.0, rabi_ratio=1.0)


def test_laserLine_ERROR_negativeRabiRatio():
    with pytest.raises(ValidationError):
        LaserLine(m=1, rabi_ratio=-0.5)


def test_resetParams_warning_driveAbove01(caplog):
    with caplog.at_level(logging.WARNING):
        ResetParams(omega_tilde=0.15)
    assert "only approximate" in caplog.text


def test_ottoParams_complexAlpha_stringInput():
    params = OttoParams(nu1=0.8, nbar_A=0.25, alpha="0.4j")
    assert params.alpha == 0.4j
    assert params.nbar_C == pytest.approx(0.16)


def test_ottoParams_ERROR_negativeOccupation():
    with pytest.raises(ValidationError):
        OttoParams(nu1=0.8, nbar_A=-0.1)


def test_stateSpec_ERROR_missingField():
    with pytest.raises(ValidationError):
        StateSpec(kind="coherent")


def test_stateSpec_ERROR_unusedField():
    with pytest.raises(ValidationError):
        StateSpec(kind="vacuum", nbar=0.25)


def test_channelConfig_ERROR_presetAndLines():
    with pytest.raises(ValidationError):
        ChannelConfig(preset="cooling", lines=[LaserLine(m=1, rabi_ratio=1.0)])


def test_channelConfig_ERROR_neitherPresetNorLines():
    with pytest.raises(ValidationError):
        ChannelConfig(epsilon=0.1)


def test_channelConfig_ERROR_presetMissingParameter():
    with pytest.raises(ValidationError):
        ChannelConfig(preset="squeezed")


def test_channelConfig_ERROR_zeroCopies():
    with pytest.raises(ValidationError):
        ChannelConfig(preset="cooling", copies=0)


#------------------------
# loading
#------------------------

def test_loadConfig_defaults_minimalFile(tmp_path):
    config = load_config(write_config(tmp_path, "channels:\n  - preset: cooling\n"))
    assert config.dim == 40
    assert config.eta == 0.05
    assert config.pulse_area == 4.5
    assert config.stepper == "exponential"
    assert config.initial_state.kind == "vacuum"


def test_loadConfig_defaults_emptyFile(tmp_path):
    config = load_config(write_config(tmp_path, ""))
    assert config.channels == []


def test_loadConfig_dimOverride_commandLine(tmp_path):
    config = load_config(write_config(tmp_path, "dim: 40\n"), dim=60)
    assert config.dim == 60


def test_loadConfig_ERROR_unknownKey(tmp_path):
    with pytest.raises(ConfigError) as e:
        load_config(write_config(tmp_path, "dim: 40\nstages: 10\n"))
    assert "stages" in str(e.value)


def test_loadConfig_ERROR_keyLocationReported(tmp_path):
    text = "channels:\n  - preset: squeezed\n"
    with pytest.raises(ConfigError) as e:
        load_config(write_config(tmp_path, text))
    assert "channels.0" in str(e.value)


def test_loadConfig_ERROR_badYaml(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, "dim: [40\n"))


def test_loadConfig_ERROR_topLevelList(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, "- 1\n- 2\n"))


def test_loadConfig_ERROR_missingFile(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.yaml"))


def test_loadConfig_ERROR_dimBelowMinimum(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, "dim: 4\n"))


def test_configFromMapping_ERROR_unknownStepper():
    with pytest.raises(ConfigError):
        config_from_mapping({"stepper": "rk4"})


def test_loadConfig_valid_shippedConfigs(config_dir):
    names = sorted(name for name in os.listdir(config_dir) if name.endswith(".yaml"))
    assert len(names) >= 20
    for name in names:
        config = load_config(os.path.join(config_dir, name))
        assert config.output_path.endswith(".csv"), name


#------------------------
# output location
#------------------------

def test_resolveOutputPath_outputDir_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("IONBATH_OUTPUT_DIR", str(tmp_path))
    config = config_from_mapping({"output_path": "run.csv"})
    assert resolve_output_path(config) == os.path.join(str(tmp_path), "run.csv")


def test_resolveOutputPath_unchanged_absolutePath(monkeypatch, tmp_path):
    monkeypatch.setenv("IONBATH_OUTPUT_DIR", "/elsewhere")
    target = str(tmp_path / "run.csv")
    assert resolve_output_path(config_from_mapping({}, out=target)) == target
