import logging
import os
from typing import Any, Dict, List

import numpy as np
import pandas as pd
import pydantic
import scipy

from ..schemas import Schema

# get logger:
log = logging.getLogger(__name__)


class RunSummary(Schema):
    """
    Machine-checkable companion of a result file: the config it ran with, library versions,
    the inline guards and the headline numbers. No timestamps, so reruns give identical files.
    """
    command: str
    config: Dict[str, Any]
    versions: Dict[str, str] = {}
    guards: Dict[str, bool] = {}
    metrics: Dict[str, Any] = {}
    warnings: List[str] = []

    @property
    def passed(self) -> bool:
        return all(self.guards.values())


def library_versions() -> Dict[str, str]:
    from .. import __version__

    return {
        "ionbath": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "pydantic": str(pydantic.VERSION),
    }


def summary_path(result_path: str) -> str:
    stem, _ = os.path.splitext(result_path)
    return stem + ".summary.json"


def write_summary(summary: RunSummary, path: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as handle:
        handle.write(summary.json(indent=2, sort_keys=True))
        handle.write("\n")
    log.info("Wrote run summary to %s", path)
