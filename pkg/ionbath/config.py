import logging
import os
from typing import Any, Dict, Optional

import yaml
from pydantic import ValidationError

from .errors import ConfigError
from .schemas import ExperimentConfig

# get logger:
log = logging.getLogger(__name__)

""" This module reads experiment configs and the environment settings
Note: relative output paths are resolved against IONBATH_OUTPUT_DIR
"""


def log_level() -> str:
    return os.environ.get("IONBATH_LOG_LEVEL", "WARNING").upper()


def output_dir() -> str:
    return os.environ.get("IONBATH_OUTPUT_DIR", ".")


def _describe(source: str, error: ValidationError) -> str:
    lines = [f"{source}: invalid config"]
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"])
        lines.append(f"  {location}: {item['msg']}")
    return "\n".join(lines)


def config_from_mapping(raw: Optional[Dict[str, Any]],
                        source: str = "<config>",
                        dim: Optional[int] = None,
                        out: Optional[str] = None) -> ExperimentConfig:
    """
    Validates a parsed config, applying the command line overrides

    :param raw: mapping as read from YAML
    :param source: name used in error messages
    :param dim: --dim override
    :param out: --out override
    """
    raw = dict(raw or {})
    if dim is not None:
        raw["dim"] = dim
    if out is not None:
        raw["output_path"] = out
    try:
        return ExperimentConfig.parse_obj(raw)
    except ValidationError as e:
        raise ConfigError(_describe(source, e)) from e


def load_config(path: str, dim: Optional[int] = None, out: Optional[str] = None) -> ExperimentConfig:
    log.debug("Loading config from %s", path)
    try:
        with open(path) as handle:
            raw = yaml.safe_load(handle)
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    except yaml.YAMLError as e:
        # the YAML error carries line and column of the problem
        raise ConfigError(f"{path}: {e}") from e
    if raw is not None and not isinstance(raw, dict):
        raise ConfigError(f"{path}: the top level of a config must be a mapping")
    return config_from_mapping(raw, path, dim, out)


def resolve_output_path(config: ExperimentConfig) -> str:
    if os.path.isabs(config.output_path):
        return config.output_path
    return os.path.join(output_dir(), config.output_path)
