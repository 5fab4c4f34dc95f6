import logging
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, StrictInt, root_validator, validator

# get logger:
log = logging.getLogger(__name__)

"""
 Here we define the "schemas", i.e. the parameter types the physics modules take and the shape of
 an experiment config file. Every model forbids unknown keys, so a typo in a config file is an error
 that pydantic reports together with the location of the offending key.
"""

MAX_SIDEBAND_ORDER = 4
MAX_RESET_DRIVE = 0.2
RESET_DRIVE_WARNING = 0.1

StateKind = Literal["vacuum", "number", "coherent", "squeezed", "squeezed_coherent", "thermal"]
PresetKind = Literal["coherent", "squeezed", "squeezed_coherent", "cooling", "heating", "thermal_pair"]

# fields each state kind needs
STATE_FIELDS = {
    "vacuum": (),
    "number": ("n",),
    "coherent": ("alpha",),
    "squeezed": ("r",),
    "squeezed_coherent": ("r", "alpha"),
    "thermal": ("nbar",),
}

PRESET_FIELDS = {
    "coherent": ("alpha",),
    "squeezed": ("r",),
    "squeezed_coherent": ("r", "alpha"),
    "cooling": (),
    "heating": (),
    "thermal_pair": ("nbar",),
}


class ComplexValue(complex):
    """
    Complex number as it can be written in YAML: [re, im], a plain number or a string like "0.4j"
    """

    @classmethod
    def __get_validators__(cls):
        yield cls.validate

    @classmethod
    def validate(cls, value):
        if isinstance(value, bool):
            raise TypeError("expected a complex number, got a boolean")
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ValueError("complex numbers are written as [re, im]")
            return complex(float(value[0]), float(value[1]))
        if isinstance(value, str):
            return complex(value.replace(" ", ""))
        if isinstance(value, (int, float, complex, np.number)):
            return complex(value)
        raise TypeError(f"expected a complex number, got {value!r}")


class Schema(BaseModel):
    class Config:
        extra = "forbid"
        json_encoders = {complex: lambda z: [z.real, z.imag]}


#------------------------
# parameter types
#------------------------

class LaserLine(Schema):
    """
    One sideband drive of an engineering channel

    :param m: sideband order, +1 red (removes a phonon), -1 blue, 0 carrier
    :param rabi_ratio: Rabi frequency of this line in units of the reference Rabi frequency
    :param eta: Lamb-Dicke parameter; lines of a config that leave it out take the config-level eta
    """
    m: StrictInt
    rabi_ratio: float
    eta: float = 0.05

    @validator("m")
    def sideband_order_supported(cls, m):
        if abs(m) > MAX_SIDEBAND_ORDER:
            raise ValueError(f"sideband order |m| <= {MAX_SIDEBAND_ORDER} supported, got m={m}")
        return m

    @validator("rabi_ratio")
    def rabi_ratio_non_negative(cls, ratio):
        if ratio < 0:
            raise ValueError(f"rabi_ratio must be >= 0, got {ratio}")
        return ratio

    @validator("eta")
    def lamb_dicke_range(cls, eta):
        if not 0 < eta <= 0.5:
            raise ValueError(f"Lamb-Dicke parameter must lie in (0, 0.5], got {eta}")
        return eta


class ChannelSpec(Schema):
    """
    The laser lines of one engineered channel and the dimensionless pulse area Omega_r tau_r
    """
    lines: List[LaserLine]
    tau_r_omega_r: float

    @validator("lines")
    def anchored(cls, lines):
        if not lines:
            raise ValueError("a channel needs at least one laser line")
        if lines[0].rabi_ratio <= 0:
            raise ValueError("the first line anchors the rescaling and needs rabi_ratio > 0")
        return lines

    @validator("tau_r_omega_r")
    def pulse_area_positive(cls, area):
        if area <= 0:
            raise ValueError(f"pulse area must be positive, got {area}")
        return area


class ResetParams(Schema):
    """
    Reset laser Rabi frequency and spontaneous decay rate of the auxiliary level.
    gamma30 sets the time unit.
    """
    omega_tilde: float
    gamma30: float = 1.0

    @validator("omega_tilde", "gamma30")
    def positive(cls, value, field):
        if value <= 0:
            raise ValueError(f"{field.name} must be positive, got {value}")
        return value

    @root_validator(skip_on_failure=True)
    def adiabatic_regime(cls, values):
        ratio = values["omega_tilde"] / values["gamma30"]
        if ratio > MAX_RESET_DRIVE:
            raise ValueError(f"omega_tilde/gamma30 = {ratio} exceeds {MAX_RESET_DRIVE}, "
                             f"adiabatic elimination no longer applies")
        if ratio > RESET_DRIVE_WARNING:
            log.warning("omega_tilde/gamma30 = %s is above %s, effective rate is only approximate",
                        ratio, RESET_DRIVE_WARNING)
        return values

    @property
    def gamma_eff(self) -> float:
        return 4.0 * self.omega_tilde ** 2 / self.gamma30


class OttoParams(Schema):
    """
    Quench-regime Otto cycle. Energies are in units of hbar nu0.
    theta holds the quench phases theta_j; None means all zero.
    """
    nu0: float = 1.0
    nu1: float
    zeta_over_nu1: ComplexValue = 0j
    nbar_A: float
    alpha: ComplexValue = 0j
    theta: Optional[List[float]] = None

    @validator("nu0", "nu1")
    def frequency_positive(cls, value, field):
        if value <= 0:
            raise ValueError(f"{field.name} must be positive, got {value}")
        return value

    @validator("nbar_A")
    def occupation_non_negative(cls, value):
        if value < 0:
            raise ValueError(f"nbar_A must be non-negative, got {value}")
        return value

    @property
    def nbar_C(self) -> float:
        return abs(self.alpha) ** 2


#------------------------
# config file sections
#------------------------

class StateSpec(Schema):
    kind: StateKind
    n: Optional[StrictInt] = None
    alpha: Optional[ComplexValue] = None
    r: Optional[float] = None
    nbar: Optional[float] = None

    @root_validator(skip_on_failure=True)
    def fields_match_kind(cls, values):
        needed = STATE_FIELDS[values["kind"]]
        missing = [name for name in needed if values.get(name) is None]
        if missing:
            raise ValueError(f"state kind '{values['kind']}' needs {', '.join(missing)}")
        unused = [name for name in ("n", "alpha", "r", "nbar") if name not in needed and values.get(name) is not None]
        if unused:
            raise ValueError(f"state kind '{values['kind']}' does not take {', '.join(unused)}")
        return values


class ChannelConfig(Schema):
    """
    Either a named preset with its parameters or raw laser lines.
    epsilon replaces the increment of the rescaled channel, copies repeats the channel
    (two identical baths act like one with twice the increment). lamb_dicke_limit keeps the
    rescaled increment but uses the leading-order jump operator of the preset.
    """
    preset: Optional[PresetKind] = None
    nbar: Optional[float] = None
    r: Optional[float] = None
    alpha: Optional[ComplexValue] = None
    lines: Optional[List[LaserLine]] = None
    pulse_area: Optional[float] = None
    epsilon: Optional[float] = None
    copies: int = Field(1, ge=1)
    lamb_dicke_limit: bool = False

    @root_validator(skip_on_failure=True)
    def preset_or_lines(cls, values):
        preset, lines = values.get("preset"), values.get("lines")
        if (preset is None) == (lines is None):
            raise ValueError("a channel is given either by 'preset' or by 'lines'")
        if preset is not None:
            needed = PRESET_FIELDS[preset]
            missing = [name for name in needed if values.get(name) is None]
            if missing:
                raise ValueError(f"preset '{preset}' needs {', '.join(missing)}")
        elif values.get("lamb_dicke_limit"):
            raise ValueError("lamb_dicke_limit needs a preset")
        if values.get("epsilon") is not None and values["epsilon"] < 0:
            raise ValueError(f"epsilon must be non-negative, got {values['epsilon']}")
        return values


class SweepConfig(Schema):
    variable: Literal["chi", "alpha_imag", "nu_ratio"]
    start: float
    stop: float
    points: int = Field(..., ge=1)
    zeta_values: Optional[List[ComplexValue]] = None

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


class OttoConfig(Schema):
    params: OttoParams
    sweep: Optional[SweepConfig] = None
    n_stages: int = Field(400, ge=1)


class ResetConfig(Schema):
    params: ResetParams
    initial_populations: List[float] = [0.0, 0.5, 0.5, 0.0]
    t_per_step: Optional[float] = Field(None, gt=0)
    dt: Optional[float] = Field(None, gt=0)
    record_every: Optional[int] = Field(None, ge=1)

    @validator("initial_populations")
    def populations_distribution(cls, populations):
        if len(populations) != 4:
            raise ValueError("the electronic state has 4 levels")
        if min(populations) < 0 or abs(sum(populations) - 1.0) > 1e-10:
            raise ValueError("initial populations must be non-negative and sum to 1")
        return populations


class ExperimentConfig(Schema):
    dim: int = Field(40, ge=8, le=128)
    eta: float = 0.05
    pulse_area: float = Field(4.5, gt=0)
    channels: List[ChannelConfig] = []
    initial_state: StateSpec = StateSpec(kind="vacuum")
    target_state: Optional[StateSpec] = None
    n_stages: int = Field(100, ge=0)
    stepper: Literal["exponential", "recursion", "kraus"] = "exponential"
    threshold: float = Field(0.95, gt=0, lt=1)
    otto: Optional[OttoConfig] = None
    reset: Optional[ResetConfig] = None
    output_path: str = "results.csv"

    @validator("eta")
    def lamb_dicke_range(cls, eta):
        if not 0 < eta <= 0.5:
            raise ValueError(f"Lamb-Dicke parameter must lie in (0, 0.5], got {eta}")
        return eta
