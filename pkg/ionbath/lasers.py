import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import eval_genlaguerre, poch

from .fock import FockSpace, annihilation
from .schemas import MAX_SIDEBAND_ORDER, ChannelSpec, LaserLine

# get logger:
log = logging.getLogger(__name__)

"""
Sideband operators and engineered channels built from laser lines.

A channel is driven by one or more sideband lines. Its jump operator K is the Rabi-weighted sum of
the sideband operators of its lines; dividing by the leading coefficient of the first (anchor) line
gives the rescaled operator K' whose leading Lamb-Dicke content is a, a^dag, a - alpha, ...
and the increment epsilon the channel adds per engineering stage.
"""

# increments above this leave the perturbative regime of a single engineering stage
EPSILON_GUARD = 0.1


@dataclass(frozen=True, eq=False)
class EngineeredChannel:
    """
    Rescaled jump operator K' and the increment epsilon it is applied with
    """
    k_prime: np.ndarray
    epsilon: float
    label: str = ""

    def __post_init__(self):
        k_prime = np.array(self.k_prime, dtype=complex)
        if k_prime.ndim != 2 or k_prime.shape[0] != k_prime.shape[1]:
            raise ValueError(f"jump operator must be square, got shape {k_prime.shape}")
        if not np.all(np.isfinite(k_prime)):
            raise ValueError("jump operator has non-finite entries")
        if self.epsilon < 0:
            raise ValueError(f"increment must be non-negative, got epsilon={self.epsilon}")
        k_prime.setflags(write=False)
        object.__setattr__(self, "k_prime", k_prime)
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @property
    def dim(self) -> int:
        return self.k_prime.shape[0]

    def with_epsilon(self, epsilon: float) -> "EngineeredChannel":
        return EngineeredChannel(self.k_prime, epsilon, self.label)


def _check_line(m: int, eta: float):
    if abs(m) > MAX_SIDEBAND_ORDER:
        raise ValueError(f"sideband order |m| <= {MAX_SIDEBAND_ORDER} supported, got m={m}")
    if not 0 < eta <= 0.5:
        raise ValueError(f"Lamb-Dicke parameter must lie in (0, 0.5], got {eta}")


def sideband_operator(space: FockSpace, m: int, eta: float) -> np.ndarray:
    """
    d_|m| = e^{-eta^2/2} sum_k (i eta)^{2k+|m|} / (k! (k+|m|)!) (a^dag)^k a^k a^|m|

    The series is summed in closed form: its only non-zero entries are
    <n|d_|m||n+|m|> = e^{-eta^2/2} (i eta)^|m| sqrt(n!/(n+|m|)!) L_n^(|m|)(eta^2).
    Negative orders give (-1)^|m| d_|m|^dag.

    :param space: truncated Fock space
    :param m: sideband order
    :param eta: Lamb-Dicke parameter
    :return: dim x dim operator
    """
    _check_line(m, eta)
    order = abs(m)
    d = np.zeros((space.dim, space.dim), dtype=complex)
    n = np.arange(max(space.dim - order, 0))
    d[n, n + order] = (
        np.exp(-eta ** 2 / 2)
        * (1j * eta) ** order
        / np.sqrt(poch(n + 1.0, order))
        * eval_genlaguerre(n, order, eta ** 2)
    )
    if m < 0:
        return (-1) ** order * d.conj().T
    return d


def engineering_operator(space: FockSpace, lines: List[LaserLine]) -> np.ndarray:
    k = np.zeros((space.dim, space.dim), dtype=complex)
    for line in lines:
        k += line.rabi_ratio * sideband_operator(space, line.m, line.eta)
    return k


def anchor_coefficient(spec: ChannelSpec) -> complex:
    """
    Leading coefficient i eta e^{-eta^2/2} rabi_ratio of the anchor line
    """
    anchor = spec.lines[0]
    if abs(anchor.m) != 1:
        raise ValueError(f"the anchor line of a channel must be a first sideband, got m={anchor.m}")
    if anchor.rabi_ratio == 0:
        raise ValueError("the anchor line of a channel needs a non-zero rabi_ratio")
    return 1j * anchor.eta * np.exp(-anchor.eta ** 2 / 2) * anchor.rabi_ratio


def rescale_channel(space: FockSpace, spec: ChannelSpec, label: str = "") -> EngineeredChannel:
    coefficient = anchor_coefficient(spec)
    anchor = spec.lines[0]
    epsilon = (anchor.rabi_ratio * spec.tau_r_omega_r * anchor.eta) ** 2 * np.exp(-anchor.eta ** 2)
    if epsilon > EPSILON_GUARD:
        log.warning("channel %s has increment epsilon=%.4f above %s, a single stage is no longer perturbative",
                    label or "", epsilon, EPSILON_GUARD)
    return EngineeredChannel(engineering_operator(space, spec.lines) / coefficient, epsilon, label)


#------------------------
# presets
#------------------------

def displacement_ratio(alpha: complex) -> float:
    """
    |alpha| for the displacement presets, which realize alpha = i|alpha| with a carrier line
    """
    alpha = complex(alpha)
    if abs(alpha.real) > 1e-12 or alpha.imag < 0:
        raise ValueError(f"displacement presets realize alpha = i|alpha| only, got alpha={alpha}")
    return alpha.imag


def squeeze_ratio(r: float) -> float:
    """
    Ratio of the blue to the red sideband, tanh(r)
    """
    if not np.isfinite(r) or r < 0:
        raise ValueError(f"squeezing presets need a finite r >= 0, got r={r}")
    return float(np.tanh(r))


def _channel(eta: float, pulse_area: float, *lines: Tuple[int, float]) -> ChannelSpec:
    return ChannelSpec(
        lines=[LaserLine(m=m, rabi_ratio=ratio, eta=eta) for m, ratio in lines],
        tau_r_omega_r=pulse_area,
    )


def channel_preset(kind: str,
                   eta: float = 0.05,
                   pulse_area: float = 4.5,
                   nbar: Optional[float] = None,
                   r: Optional[float] = None,
                   alpha: Optional[complex] = None) -> List[ChannelSpec]:
    """
    Laser lines of the standard engineered reservoirs.

    :param kind: coherent, squeezed, squeezed_coherent, cooling, heating or thermal_pair
    :param nbar: mean occupation of the thermal_pair target
    :param r: squeezing parameter
    :param alpha: displacement, pure imaginary
    :return: list of channel specs, two for thermal_pair and one otherwise
    """
    if kind == "cooling":
        return [_channel(eta, pulse_area, (1, 1.0))]
    if kind == "heating":
        return [_channel(eta, pulse_area, (-1, 1.0))]
    if kind == "coherent":
        return [_channel(eta, pulse_area, (1, 1.0), (0, displacement_ratio(alpha) * eta))]
    if kind == "squeezed":
        return [_channel(eta, pulse_area, (1, 1.0), (-1, squeeze_ratio(r)))]
    if kind == "squeezed_coherent":
        return [_channel(eta, pulse_area, (1, 1.0), (-1, squeeze_ratio(r)), (0, displacement_ratio(alpha) * eta))]
    if kind == "thermal_pair":
        if nbar is None or nbar <= 0:
            raise ValueError(f"thermal_pair needs nbar > 0, got nbar={nbar}")
        # epsilon_1 / epsilon_2 = 1 + 1/nbar
        return [
            _channel(eta, pulse_area, (1, 1.0)),
            _channel(eta, pulse_area, (-1, 1.0 / np.sqrt(1.0 + 1.0 / nbar))),
        ]
    raise ValueError(f"unknown channel preset '{kind}'")


def leading_order_operators(space: FockSpace,
                            kind: str,
                            r: Optional[float] = None,
                            alpha: Optional[complex] = None) -> List[np.ndarray]:
    """
    Lamb-Dicke limit of the rescaled jump operators of a preset, one per channel
    """
    a = annihilation(space)
    ad = a.conj().T
    identity = space.identity()
    if kind == "cooling":
        return [a]
    if kind == "heating":
        return [ad]
    if kind == "coherent":
        return [a - complex(alpha) * identity]
    if kind == "squeezed":
        return [a + np.tanh(r) * ad]
    if kind == "squeezed_coherent":
        return [a + np.tanh(r) * ad - complex(alpha) * identity]
    if kind == "thermal_pair":
        return [a, ad]
    raise ValueError(f"unknown channel preset '{kind}'")
