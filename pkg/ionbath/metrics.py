import logging

import numpy as np
from scipy import linalg

from .errors import NonPhysicalStateError
from .fock import DensityMatrix

# get logger:
log = logging.getLogger(__name__)

# eigenvalues of a fidelity argument below this are treated as a broken state, not roundoff
FIDELITY_CLAMP = -1e-10
# eigenvalues below this fraction of the largest one are roundoff and dropped from square roots
EIGENVALUE_FLOOR = 1e-14


def _check_same_space(rho: DensityMatrix, sigma: DensityMatrix):
    if rho.dim != sigma.dim:
        raise ValueError(f"states live in different spaces (dim {rho.dim} vs {sigma.dim})")


def _psd_sqrt(rho: DensityMatrix) -> np.ndarray:
    values, vectors = linalg.eigh(rho.hermitian_part())
    if values[0] < FIDELITY_CLAMP:
        raise NonPhysicalStateError(f"fidelity argument has eigenvalue {values[0]:.3e}")
    values = np.where(values > EIGENVALUE_FLOOR * values[-1], values, 0.0)
    return (vectors * np.sqrt(values)) @ vectors.conj().T


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """
    Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2,
    evaluated as the squared sum of the singular values of sqrt(rho) sqrt(sigma)

    :param rho: density matrix
    :param sigma: density matrix on the same space
    :return: fidelity in [0, 1]
    """
    _check_same_space(rho, sigma)
    singular = linalg.svdvals(_psd_sqrt(rho) @ _psd_sqrt(sigma))
    value = float(np.sum(singular) ** 2)
    return min(max(value, 0.0), 1.0)


def mean_occupation(rho: DensityMatrix) -> float:
    return float(np.dot(np.arange(rho.dim), rho.populations()))


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    _check_same_space(rho, sigma)
    delta = rho.matrix - sigma.matrix
    values = linalg.eigvalsh(0.5 * (delta + delta.conj().T))
    return float(0.5 * np.sum(np.abs(values)))


def tail_mass(rho: DensityMatrix, k: int = 2) -> float:
    return rho.tail_mass(k)
