import logging
from dataclasses import dataclass, replace
from typing import List, Tuple

import numpy as np
from scipy import linalg

from .errors import NonPhysicalStateError

# get logger:
log = logging.getLogger(__name__)

"""
Truncated Fock space of the vibrational mode: ladder operators, displacement and squeezing,
and the states used as synthesis targets.
Operators are plain dim x dim complex numpy arrays, states are wrapped in DensityMatrix so the
physical invariants travel with them.
"""

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-8
# population of the top two levels above which a state is flagged as truncation dominated
TAIL_WARNING_THRESHOLD = 1e-8


@dataclass(frozen=True)
class FockSpace:
    """
    Levels |0>...|dim-1> of the vibrational mode
    """
    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"a Fock space needs at least 2 levels, got dim={self.dim}")

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    def basis(self, j: int) -> np.ndarray:
        if not 0 <= j < self.dim:
            raise ValueError(f"level {j} is outside the truncated space of dimension {self.dim}")
        ket = np.zeros(self.dim, dtype=complex)
        ket[j] = 1.0
        return ket


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Vibrational (or electronic) state. Construction only checks shape and finiteness;
    the Hermiticity/trace/positivity invariants are checked by validate(), since states produced
    by the Euler recursion are allowed to drift slightly out of the PSD cone.

    :param matrix: square complex matrix
    :param tags: free-form labels attached by producers, e.g. "truncation_dominated"
    """
    matrix: np.ndarray
    tags: Tuple[str, ...] = ()

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"a density matrix must be square, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise NonPhysicalStateError("density matrix has non-finite entries")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "tags", tuple(self.tags))

    @classmethod
    def from_ket(cls, ket: np.ndarray) -> "DensityMatrix":
        ket = np.asarray(ket, dtype=complex)
        norm = np.linalg.norm(ket)
        if norm == 0:
            raise NonPhysicalStateError("cannot build a state from the zero vector")
        ket = ket / norm
        return cls(np.outer(ket, ket.conj()))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def space(self) -> FockSpace:
        return FockSpace(self.dim)

    @property
    def trace_error(self) -> float:
        return float(abs(np.trace(self.matrix) - 1.0))

    @property
    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def eigenvalues(self) -> np.ndarray:
        return linalg.eigvalsh(self.hermitian_part())

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])

    def hermitian_part(self) -> np.ndarray:
        return 0.5 * (self.matrix + self.matrix.conj().T)

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.matrix))

    def tail_mass(self, k: int = 2) -> float:
        if not 0 < k < self.dim:
            raise ValueError(f"tail size k={k} must lie in [1, {self.dim - 1}]")
        return float(np.sum(self.populations()[-k:]))

    def violations(self) -> List[str]:
        """
        :return: human readable list of broken invariants, empty for a valid state
        """
        problems = []
        if self.hermiticity_error > HERMITICITY_TOL:
            problems.append(f"hermiticity error {self.hermiticity_error:.3e}")
        if self.trace_error > TRACE_TOL:
            problems.append(f"trace error {self.trace_error:.3e}")
        min_eig = self.min_eigenvalue
        if min_eig < -POSITIVITY_TOL:
            problems.append(f"minimum eigenvalue {min_eig:.3e}")
        return problems

    def validate(self) -> "DensityMatrix":
        problems = self.violations()
        if problems:
            raise NonPhysicalStateError("invalid density matrix: " + ", ".join(problems))
        return self

    def hermitized(self) -> "DensityMatrix":
        return replace(self, matrix=self.hermitian_part())

    def clamped(self) -> "DensityMatrix":
        """
        Closest PSD unit-trace state: negative eigenvalues of the Hermitian part set to 0,
        then renormalized.
        """
        values, vectors = linalg.eigh(self.hermitian_part())
        values = np.clip(values, 0.0, None)
        total = values.sum()
        if total <= 0:
            raise NonPhysicalStateError("state has no positive spectral weight")
        matrix = (vectors * (values / total)) @ vectors.conj().T
        return replace(self, matrix=0.5 * (matrix + matrix.conj().T))

    def with_tags(self, *tags: str) -> "DensityMatrix":
        return replace(self, tags=self.tags + tuple(t for t in tags if t not in self.tags))


#------------------------
# operators
#------------------------

def annihilation(space: FockSpace) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, space.dim)), k=1).astype(complex)


def creation(space: FockSpace) -> np.ndarray:
    return annihilation(space).conj().T


def number_operator(space: FockSpace) -> np.ndarray:
    return np.diag(np.arange(space.dim)).astype(complex)


def displacement(space: FockSpace, alpha: complex) -> np.ndarray:
    """
    D(alpha) = exp(alpha a^dag - conj(alpha) a). The truncated generator is anti-Hermitian,
    so the result is unitary to machine precision; truncation shows up as tail population instead.
    """
    a = annihilation(space)
    return linalg.expm(alpha * a.conj().T - np.conj(alpha) * a)


def squeeze(space: FockSpace, r: float) -> np.ndarray:
    """
    S(r) = exp(r/2 (a^dag^2 - a^2)); S(-r)|0> is the dark state of a + tanh(r) a^dag
    """
    if abs(r) > 1.5 and space.dim >= 40:
        log.warning("squeezing r=%s exceeds 1.5, check tail mass of the resulting states", r)
    a = annihilation(space)
    ad = a.conj().T
    return linalg.expm(0.5 * r * (ad @ ad - a @ a))


#------------------------
# states
#------------------------

def _checked(state: DensityMatrix, label: str) -> DensityMatrix:
    state = state.validate()
    tail = state.tail_mass(2)
    if tail > TAIL_WARNING_THRESHOLD:
        log.warning("%s has tail mass %.3e at dim=%d", label, tail, state.dim)
    return state


def number_state(space: FockSpace, j: int) -> DensityMatrix:
    return DensityMatrix.from_ket(space.basis(j))


def vacuum_state(space: FockSpace) -> DensityMatrix:
    return number_state(space, 0)


def coherent_state(space: FockSpace, alpha: complex) -> DensityMatrix:
    ket = displacement(space, alpha) @ space.basis(0)
    return _checked(DensityMatrix.from_ket(ket), f"coherent state alpha={alpha}")


def squeezed_coherent_state(space: FockSpace, r: float, alpha: complex = 0.0) -> DensityMatrix:
    """
    S(-r) D(alpha) |0>
    """
    ket = squeeze(space, -r) @ (displacement(space, alpha) @ space.basis(0))
    return _checked(DensityMatrix.from_ket(ket), f"squeezed coherent state r={r} alpha={alpha}")


def thermal_state(space: FockSpace, nbar: float) -> DensityMatrix:
    """
    Diagonal state with p_j = nbar^j / (nbar + 1)^(j + 1), renormalized over the truncated space
    """
    if nbar < 0:
        raise ValueError(f"mean occupation must be non-negative, got nbar={nbar}")
    j = np.arange(space.dim)
    p = nbar ** j / (nbar + 1.0) ** (j + 1)
    return _checked(DensityMatrix(np.diag(p / p.sum())), f"thermal state nbar={nbar}")
