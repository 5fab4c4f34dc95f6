import logging
import os
from dataclasses import asdict, dataclass, fields
from typing import List, Optional, Sequence

import pandas as pd

# get logger:
log = logging.getLogger(__name__)

"""
Result rows and their CSV form. Each row type fixes the columns and their order,
so files from identical configs are identical byte for byte.
"""


@dataclass(frozen=True)
class ResultRow:
    """
    One engineering stage (or the steady state, which has no stage index)
    """
    N: Optional[int]
    fidelity_inf: Optional[float]
    fidelity_0: Optional[float]
    mean_occupation: float
    trace_error: float
    min_eigenvalue: float
    tail_mass: float
    warnings: str = ""


@dataclass(frozen=True)
class ResetRow:
    step: int
    time: float
    rho00: float
    rho11: float
    rho22: float
    rho33: float
    trace_error: float


@dataclass(frozen=True)
class OttoRow:
    coordinate: float
    zeta_re: float
    zeta_im: float
    gap_sign: int
    chi: Optional[float]
    efficiency: Optional[float]
    efficiency_otto: float
    regime: str
    surpasses_otto: bool
    W: Optional[float] = None
    Q2: Optional[float] = None
    Q4: Optional[float] = None
    W_numeric: Optional[float] = None
    Q2_numeric: Optional[float] = None
    Q4_numeric: Optional[float] = None
    efficiency_numeric: Optional[float] = None
    max_difference: Optional[float] = None
    nbar_C_difference: Optional[float] = None
    fidelity_A: Optional[float] = None
    fidelity_C: Optional[float] = None
    warnings: str = ""


def rows_frame(rows: Sequence, row_type: type) -> pd.DataFrame:
    """
    :param rows: rows of a single type
    :param row_type: dataclass giving the columns, used when rows is empty
    :return: frame with the columns of row_type in declaration order
    """
    columns = [field.name for field in fields(row_type)]
    return pd.DataFrame.from_records([asdict(row) for row in rows], columns=columns)


def write_frame(frame: pd.DataFrame, path: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.12g")
    log.info("Wrote %d rows to %s", len(frame), path)


def warnings_text(messages: List[str]) -> str:
    return "; ".join(messages)
