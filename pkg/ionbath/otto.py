import logging
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .fock import TAIL_WARNING_THRESHOLD, DensityMatrix, FockSpace, annihilation
from .schemas import OttoParams

# get logger:
log = logging.getLogger(__name__)

"""
Quantum Otto cycle in the quench regime.

A --(quench nu0 -> nu1, work W1)--> B --(bath, heat Q2)--> C --(quench nu1 -> nu0, work W3)--> D
--(bath, heat Q4)--> A. The strokes are sudden, so the state only picks up the quench phases theta_j
while the Hamiltonian after the first stroke is that of a displaced squeezed mode,
a1 = cosh r a + sinh r a^dag + zeta/nu1 with r = ln(nu1/nu0)/2.

Energies are in units of hbar nu0, hbar = 1. The engine extracts work when W = W1 + W3 < 0.
"""

CHI_DENOMINATOR_GUARD = 1e-12

ArrayLike = Union[DensityMatrix, np.ndarray]


@dataclass(frozen=True)
class CycleEnergetics:
    """
    Work and heat per stroke plus the mean energies at the four cycle points
    """
    W1: float
    Q2: float
    W3: float
    Q4: float
    H_A: float
    H_B: float
    H_C: float
    H_D: float

    @property
    def W_total(self) -> float:
        return self.W1 + self.W3

    @property
    def closure(self) -> float:
        return self.W1 + self.Q2 + self.W3 + self.Q4

    def as_dict(self) -> Dict[str, float]:
        values = asdict(self)
        values["W_total"] = self.W_total
        return values

    @classmethod
    def from_point_energies(cls, H_A: float, H_B: float, H_C: float, H_D: float) -> "CycleEnergetics":
        return cls(W1=H_B - H_A, Q2=H_C - H_B, W3=H_D - H_C, Q4=H_A - H_D, H_A=H_A, H_B=H_B, H_C=H_C, H_D=H_D)


@dataclass(frozen=True)
class ChiComponents:
    chi_A1: float
    chi_A2: float
    chi_C1: float
    chi_C2: float
    value: float


@dataclass(frozen=True)
class Efficiency:
    """
    value is None outside the engine regime
    """
    value: Optional[float]
    regime: str


@dataclass(frozen=True)
class ChiThresholds:
    chi_surpass_high: float
    chi_surpass_low: float
    chi_zero_work: float
    # E > E_Otto iff chi > hot_bound (nbar_A > nbar_C) or chi < cold_bound (nbar_A < nbar_C)
    hot_bound: float
    cold_bound: float

    def surpasses(self, chi: float, gap_sign: int) -> bool:
        if gap_sign > 0:
            return chi > self.hot_bound
        if gap_sign < 0:
            return chi < self.cold_bound
        return False


def squeeze_param(nu0: float, nu1: float) -> float:
    if nu0 <= 0 or nu1 <= 0:
        raise ValueError(f"trap frequencies must be positive, got nu0={nu0}, nu1={nu1}")
    return 0.5 * np.log(nu1 / nu0)


def kappa1(params: OttoParams) -> complex:
    r = squeeze_param(params.nu0, params.nu1)
    z = complex(params.zeta_over_nu1)
    return z * np.cosh(r) + np.conj(z) * np.sinh(r)


def _phases(params: OttoParams, dim: int) -> np.ndarray:
    if params.theta is None:
        return np.zeros(dim)
    theta = np.asarray(params.theta, dtype=float)
    if theta.size < dim:
        raise ValueError(f"need {dim} quench phases, got {theta.size}")
    return theta[:dim]


def _coefficients(state: ArrayLike) -> np.ndarray:
    return np.asarray(state.matrix if isinstance(state, DensityMatrix) else state, dtype=complex)


def _coherence_sums(p: np.ndarray, theta: np.ndarray) -> Tuple[complex, complex]:
    """
    sum_j p_{j,j+1} sqrt(j+1) e^{i(theta_{j+1}-theta_j)} and
    sum_j p_{j,j+2} sqrt((j+1)(j+2)) e^{i(theta_{j+2}-theta_j)}
    """
    j = np.arange(p.shape[0])
    first = np.diagonal(p, offset=1) * np.sqrt(j[:-1] + 1.0) * np.exp(1j * (theta[1:] - theta[:-1]))
    second = (np.diagonal(p, offset=2) * np.sqrt((j[:-2] + 1.0) * (j[:-2] + 2.0))
              * np.exp(1j * (theta[2:] - theta[:-2])))
    return complex(first.sum()), complex(second.sum())


def chi_components(pA: ArrayLike, qC: ArrayLike, params: OttoParams) -> Tuple[float, float, float, float]:
    """
    Coherence contributions to the energy after the first quench (A) and at C
    """
    p, q = _coefficients(pA), _coefficients(qC)
    r = squeeze_param(params.nu0, params.nu1)
    kappa = kappa1(params)
    sinh2r = np.sinh(2 * r)
    sA1, sA2 = _coherence_sums(p, _phases(params, p.shape[0]))
    sC1, sC2 = _coherence_sums(q, np.zeros(q.shape[0]))
    return (
        float(2 * params.nu1 * np.real(kappa * sA1)),
        float(params.nu1 * sinh2r * np.real(sA2)),
        float(2 * params.nu1 * np.real(kappa * sC1)),
        float(params.nu1 * sinh2r * np.real(sC2)),
    )


def chi_general(pA: ArrayLike, qC: ArrayLike, params: OttoParams) -> ChiComponents:
    """
    chi = (chi_C - chi_A) / (nu1 cosh 2r (nbar_A - nbar_C)) with the occupations taken from the states

    :param pA: state at A in the initial number basis
    :param qC: state at C in the initial number basis
    """
    p, q = _coefficients(pA), _coefficients(qC)
    levels = np.arange(p.shape[0])
    gap = float(np.real(np.dot(levels, np.diag(p))) - np.real(np.dot(np.arange(q.shape[0]), np.diag(q))))
    if abs(gap) < CHI_DENOMINATOR_GUARD:
        raise ValueError("chi is undefined when the occupations at A and C coincide")
    chi_A1, chi_A2, chi_C1, chi_C2 = chi_components(p, q, params)
    r = squeeze_param(params.nu0, params.nu1)
    value = ((chi_C1 + chi_C2) - (chi_A1 + chi_A2)) / (params.nu1 * np.cosh(2 * r) * gap)
    return ChiComponents(chi_A1, chi_A2, chi_C1, chi_C2, float(value))


def _closed_chi_C(params: OttoParams) -> Tuple[float, float]:
    # coherent state at C: <a^dag> = conj(alpha), <a^dag^2> = conj(alpha)^2
    r = squeeze_param(params.nu0, params.nu1)
    alpha_c = np.conj(complex(params.alpha))
    return (float(2 * params.nu1 * np.real(kappa1(params) * alpha_c)),
            float(params.nu1 * np.sinh(2 * r) * np.real(alpha_c ** 2)))


def chi_closed_form(params: OttoParams) -> float:
    """
    chi = [2 sech(2r) Re(kappa1 alpha*) + tanh(2r) Re(alpha*^2)] / (nbar_A - |alpha|^2)
    for a thermal state at A and a coherent state at C
    """
    gap = params.nbar_A - params.nbar_C
    if abs(gap) < CHI_DENOMINATOR_GUARD:
        raise ValueError(f"chi is undefined for nbar_A = |alpha|^2 = {params.nbar_C}")
    r = squeeze_param(params.nu0, params.nu1)
    alpha_c = np.conj(complex(params.alpha))
    numerator = (2 / np.cosh(2 * r) * np.real(kappa1(params) * alpha_c)
                 + np.tanh(2 * r) * np.real(alpha_c ** 2))
    return float(numerator / gap)


def energetics_closed(params: OttoParams) -> CycleEnergetics:
    """
    Thermal state nbar_A at A, coherent state alpha at C.
    Written through the coherence terms chi_C - chi_A, which stay finite at nbar_A = nbar_C.
    """
    r = squeeze_param(params.nu0, params.nu1)
    nu1_cosh = params.nu1 * np.cosh(2 * r)
    shift = params.nu1 * abs(complex(params.zeta_over_nu1)) ** 2
    chi_C1, chi_C2 = _closed_chi_C(params)
    return CycleEnergetics.from_point_energies(
        H_A=params.nu0 * (params.nbar_A + 0.5),
        H_B=nu1_cosh * (params.nbar_A + 0.5) + shift,
        H_C=nu1_cosh * (params.nbar_C + 0.5) + shift + chi_C1 + chi_C2,
        H_D=params.nu0 * (params.nbar_C + 0.5),
    )


def stroke_hamiltonians(params: OttoParams, space: FockSpace) -> Tuple[np.ndarray, np.ndarray]:
    """
    :return: H(0) = nu0 (a^dag a + 1/2) and H(tau1) = nu1 (a1^dag a1 + 1/2) in the initial number basis
    """
    r = squeeze_param(params.nu0, params.nu1)
    a = annihilation(space)
    identity = space.identity()
    a1 = np.cosh(r) * a + np.sinh(r) * a.conj().T + complex(params.zeta_over_nu1) * identity
    h0 = params.nu0 * (a.conj().T @ a + 0.5 * identity)
    h1 = params.nu1 * (a1.conj().T @ a1 + 0.5 * identity)
    return h0, h1


def energetics_numeric(rhoA: DensityMatrix,
                       rhoC: DensityMatrix,
                       params: OttoParams,
                       space: Optional[FockSpace] = None) -> CycleEnergetics:
    """
    Mean energies at the cycle points from traces with the stroke Hamiltonians.
    The quenches multiply coherences by the phases e^{-i(theta_j - theta_k)}.
    """
    space = space or rhoA.space
    if rhoA.dim != space.dim or rhoC.dim != space.dim:
        raise ValueError(f"states must live in the Fock space of dimension {space.dim}")
    for label, state in (("rho_A", rhoA), ("rho_C", rhoC)):
        tail = state.tail_mass(2)
        if tail > TAIL_WARNING_THRESHOLD:
            log.warning("%s has tail mass %.3e at dim=%d, energies are truncation limited", label, tail, space.dim)

    h0, h1 = stroke_hamiltonians(params, space)
    phase = np.exp(-1j * _phases(params, space.dim))
    quench = np.outer(phase, phase.conj())
    rho_B = rhoA.matrix * quench
    rho_D = rhoC.matrix * quench.conj()

    def energy(rho: np.ndarray, h: np.ndarray) -> float:
        return float(np.real(np.trace(rho @ h)))

    return CycleEnergetics.from_point_energies(
        H_A=energy(rhoA.matrix, h0),
        H_B=energy(rho_B, h1),
        H_C=energy(rhoC.matrix, h1),
        H_D=energy(rho_D, h0),
    )


def _classify(W: float, Q2: float, Q4: float, scale: float) -> Efficiency:
    tolerance = 1e-12 * scale
    if abs(Q2) <= tolerance and abs(Q4) <= tolerance:
        return Efficiency(None, "no_population_gap")
    if abs(W) <= tolerance:
        return Efficiency(0.0, "zero_work")
    if W > 0:
        return Efficiency(None, "no_engine")
    absorbed = max(Q2, 0.0) + max(Q4, 0.0)
    if Q2 > tolerance and Q4 > tolerance:
        regime = "q2_q4_absorbed"
    elif Q4 > 0:
        regime = "q4_absorbed"
    else:
        regime = "q2_absorbed"
    return Efficiency(min(-W / absorbed, 1.0), regime)


def efficiency_from_chi(chi: float, nu0: float, nu1: float, gap_sign: int) -> Efficiency:
    """
    Efficiency as a function of chi for a given sign of nbar_A - nbar_C.
    The energetics are taken per unit population gap, the efficiency does not depend on its size.
    """
    r = squeeze_param(nu0, nu1)
    nu1_cosh = nu1 * np.cosh(2 * r)
    sign = float(np.sign(gap_sign))
    W = -(nu0 - (1.0 - chi) * nu1_cosh) * sign
    Q2 = -(1.0 - chi) * nu1_cosh * sign
    Q4 = nu0 * sign
    return _classify(W, Q2, Q4, nu0 + nu1_cosh)


def efficiency(params: OttoParams, energetics: Optional[CycleEnergetics] = None) -> Efficiency:
    """
    -W / (absorbed heat) with a regime tag; defaults to the closed-form energetics
    """
    energetics = energetics or energetics_closed(params)
    r = squeeze_param(params.nu0, params.nu1)
    scale = (params.nu0 + params.nu1 * np.cosh(2 * r)) * max(params.nbar_A, params.nbar_C, 1.0)
    return _classify(energetics.W_total, energetics.Q2, energetics.Q4, scale)


def otto_reference(nu0: float, nu1: float) -> float:
    return 1.0 - min(nu1 / nu0, nu0 / nu1)


def chi_thresholds(nu0: float, nu1: float) -> ChiThresholds:
    r = squeeze_param(nu0, nu1)
    sech = 1.0 / np.cosh(2 * r)
    high = 1.0 - sech
    low = 1.0 - (nu0 / nu1) ** 2 * sech
    zero = 1.0 - (nu0 / nu1) * sech
    if nu1 < nu0:
        hot, cold = high, low
    else:
        hot, cold = low, high
    return ChiThresholds(float(high), float(low), float(zero), float(hot), float(cold))
