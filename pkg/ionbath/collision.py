import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional

import numpy as np
from scipy import linalg, sparse
from scipy.sparse.linalg import expm_multiply

from .errors import DegenerateSteadyStateError, NonPhysicalStateError, UnstableStepperError
from .fock import POSITIVITY_TOL, TAIL_WARNING_THRESHOLD, DensityMatrix, FockSpace
from .lasers import EngineeredChannel, engineering_operator
from .schemas import ChannelSpec

# get logger:
log = logging.getLogger(__name__)

"""
Engineering stages acting on the vibrational state.

The default stepper applies exp(L) once per stage: the Lindblad semigroup of the engineered channels,
completely positive and trace preserving for any epsilon. recursion_step (one Euler step of L) and
kraus_step are its second-order expansions; they stay contractive while
eps * max eig(sum K'^dag K') <= 1, which fails in the top levels of large truncations.
exact_joint_step is the unexpanded oracle. Density matrices are vectorized by stacking columns.
"""

# kernel eigenvalues of the Liouvillian must be below this times its 1-norm
KERNEL_TOL = 1e-10
# largest eps-weighted eigenvalue of sum K'^dag K' the expanded steppers can be iterated with
STIFFNESS_LIMIT = 1.0


@dataclass(frozen=True, eq=False)
class Superoperator:
    """
    dim^2 x dim^2 matrix acting on column-stacked density matrices
    """
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        return DensityMatrix(unvectorize(self.matrix @ vectorize(rho.matrix), rho.dim))


@dataclass(frozen=True, eq=False)
class Trajectory:
    states: List[DensityMatrix]

    def __len__(self):
        return len(self.states)

    def __getitem__(self, index) -> DensityMatrix:
        return self.states[index]

    def __iter__(self):
        return iter(self.states)

    @property
    def final(self) -> DensityMatrix:
        return self.states[-1]


def vectorize(matrix: np.ndarray) -> np.ndarray:
    return np.asarray(matrix).reshape(-1, order="F")


def unvectorize(vector: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(vector).reshape((dim, dim), order="F")


def _check_channels(rho: DensityMatrix, channels: List[EngineeredChannel]):
    for channel in channels:
        if channel.dim != rho.dim:
            raise ValueError(f"channel {channel.label!r} acts on dim {channel.dim}, state has dim {rho.dim}")


def _dissipator(matrix: np.ndarray, k: np.ndarray) -> np.ndarray:
    kdk = k.conj().T @ k
    return k @ matrix @ k.conj().T - 0.5 * (kdk @ matrix + matrix @ kdk)


#------------------------
# steppers
#------------------------

def recursion_step(rho: DensityMatrix, channels: List[EngineeredChannel]) -> DensityMatrix:
    """
    rho' = rho + sum_mu eps_mu (K' rho K'^dag - 1/2 {K'^dag K', rho})
    """
    _check_channels(rho, channels)
    result = rho.matrix.copy()
    for channel in channels:
        result += channel.epsilon * _dissipator(rho.matrix, channel.k_prime)
    return DensityMatrix(result)


def kraus_operators(channels: List[EngineeredChannel], space: FockSpace) -> List[np.ndarray]:
    """
    M_0 = I - 1/2 sum_mu eps_mu K'^dag K', M_mu = -i sqrt(eps_mu) K'
    """
    m0 = space.identity()
    jumps = []
    for channel in channels:
        k = channel.k_prime
        m0 = m0 - 0.5 * channel.epsilon * (k.conj().T @ k)
        jumps.append(-1j * np.sqrt(channel.epsilon) * k)
    return [m0] + jumps


def kraus_step(rho: DensityMatrix, channels: List[EngineeredChannel]) -> DensityMatrix:
    _check_channels(rho, channels)
    result = np.zeros_like(rho.matrix)
    for m in kraus_operators(channels, rho.space):
        result += m @ rho.matrix @ m.conj().T
    return DensityMatrix(result)


def kraus_completeness_residual(channels: List[EngineeredChannel], space: FockSpace) -> float:
    total = sum(m.conj().T @ m for m in kraus_operators(channels, space))
    return float(np.max(np.abs(total - space.identity())))


def exact_joint_step(rho: DensityMatrix, specs: List[ChannelSpec], d_levels: int) -> DensityMatrix:
    """
    One engineering stage without the second-order expansion: the electronic levels |0>...|d-2>
    start in |0><0|, channel mu couples |0> to |mu> through its unrescaled operator K_mu,
    exp(-i H_K tau_r) is applied exactly and the electronic levels are traced out.

    :param rho: vibrational state
    :param specs: one channel spec per excited electronic level
    :param d_levels: number of electronic levels including the auxiliary reset level
    :return: reduced vibrational state
    """
    if d_levels - 2 != len(specs):
        raise ValueError(f"{d_levels} electronic levels carry {d_levels - 2} channels, got {len(specs)}")
    space = rho.space
    levels = d_levels - 1
    hamiltonian = np.zeros((levels * space.dim, levels * space.dim), dtype=complex)
    for mu, spec in enumerate(specs, start=1):
        transition = np.zeros((levels, levels))
        transition[mu, 0] = 1.0
        coupling = np.kron(transition, spec.tau_r_omega_r * engineering_operator(space, spec.lines))
        hamiltonian += coupling + coupling.conj().T
    unitary = linalg.expm(-1j * hamiltonian)
    ground = np.zeros((levels, levels))
    ground[0, 0] = 1.0
    joint = unitary @ np.kron(ground, rho.matrix) @ unitary.conj().T
    reduced = np.trace(joint.reshape(levels, space.dim, levels, space.dim), axis1=0, axis2=2)
    return DensityMatrix(reduced)


def _exponential(rho: DensityMatrix, generator: sparse.spmatrix) -> DensityMatrix:
    vector = expm_multiply(generator, vectorize(rho.matrix))
    return DensityMatrix(unvectorize(vector, rho.dim)).hermitized()


def exponential_step(rho: DensityMatrix, channels: List[EngineeredChannel]) -> DensityMatrix:
    """
    rho' = unvec(exp(L) vec(rho)), one stage of the Lindblad semigroup of the channels
    """
    _check_channels(rho, channels)
    return _exponential(rho, sparse_liouvillian(channels, rho.space))


STEPPERS: Dict[str, Callable[[DensityMatrix, List[EngineeredChannel]], DensityMatrix]] = {
    "exponential": exponential_step,
    "recursion": recursion_step,
    "kraus": kraus_step,
}
EXPANDED_STEPPERS = ("recursion", "kraus")


def stiffness(channels: List[EngineeredChannel], space: FockSpace) -> float:
    """
    Largest eigenvalue of sum_mu eps_mu K'^dag K'. One expanded stage multiplies the matching
    no-jump component by 1 - stiffness and feeds the same weight to the jump terms, so
    iterating stays contractive only while stiffness <= STIFFNESS_LIMIT.
    """
    total = np.zeros((space.dim, space.dim), dtype=complex)
    for channel in channels:
        total += channel.epsilon * (channel.k_prime.conj().T @ channel.k_prime)
    return float(linalg.eigvalsh(total)[-1])


def check_stiffness(channels: List[EngineeredChannel], space: FockSpace, stepper: str):
    if stepper not in EXPANDED_STEPPERS:
        return
    value = stiffness(channels, space)
    if value > STIFFNESS_LIMIT:
        raise UnstableStepperError(f"stepper '{stepper}' diverges at dim {space.dim}: eps * max eig(K'^dag K') = "
                                   f"{value:.3f} exceeds {STIFFNESS_LIMIT}, use the exponential stepper "
                                   f"or a smaller truncation")


def iterate_stages(rho0: DensityMatrix,
                   channels: List[EngineeredChannel],
                   n_stages: int,
                   stepper: str = "exponential") -> Iterator[DensityMatrix]:
    """
    Yields rho_0, rho_1, ..., rho_N without keeping them.
    The expanded steppers are refused when they would amplify the top levels.
    """
    if n_stages < 0:
        raise ValueError(f"number of stages must be non-negative, got {n_stages}")
    if stepper not in STEPPERS:
        raise ValueError(f"unknown stepper '{stepper}', choose one of {sorted(STEPPERS)}")
    _check_channels(rho0, channels)
    check_stiffness(channels, rho0.space, stepper)
    if stepper == "exponential":
        generator = sparse_liouvillian(channels, rho0.space)

        def step(rho, _):
            return _exponential(rho, generator)
    else:
        step = STEPPERS[stepper]
    rho = rho0
    yield rho
    for stage in range(1, n_stages + 1):
        rho = step(rho, channels)
        if stage % 1000 == 0:
            log.debug("stage %d of %d", stage, n_stages)
        yield rho


def evolve(rho0: DensityMatrix,
           channels: List[EngineeredChannel],
           n_stages: int,
           stepper: str = "exponential") -> Trajectory:
    return Trajectory(list(iterate_stages(rho0, channels, n_stages, stepper)))


def semigroup_residual(rho: DensityMatrix, channels: List[EngineeredChannel], stepper: str = "kraus") -> float:
    """
    Trace norm of Phi_eps(Phi_eps(rho)) - Phi_2eps(rho)
    """
    step = STEPPERS[stepper]
    doubled = [channel.with_epsilon(2 * channel.epsilon) for channel in channels]
    delta = step(step(rho, channels), channels).matrix - step(rho, doubled).matrix
    return float(np.sum(np.abs(linalg.eigvalsh(0.5 * (delta + delta.conj().T)))))


#------------------------
# vectorized dynamics
#------------------------

def sparse_liouvillian(channels: List[EngineeredChannel], space: Optional[FockSpace] = None) -> sparse.csr_matrix:
    """
    L = sum_mu eps_mu [conj(K') (x) K' - 1/2 (I (x) K'^dag K' + (K'^dag K')^T (x) I)]
    as a sparse matrix; sideband operators are banded, so L stays sparse.
    """
    if space is None:
        if not channels:
            raise ValueError("cannot infer the Fock space of an empty channel list")
        space = FockSpace(channels[0].dim)
    identity = sparse.identity(space.dim, dtype=complex, format="csr")
    total = sparse.csr_matrix((space.dim ** 2, space.dim ** 2), dtype=complex)
    for channel in channels:
        if channel.dim != space.dim:
            raise ValueError(f"channel {channel.label!r} acts on dim {channel.dim}, expected {space.dim}")
        k = sparse.csr_matrix(channel.k_prime)
        kdk = sparse.csr_matrix(k.conj().T @ k)
        total = total + channel.epsilon * (
            sparse.kron(k.conj(), k, format="csr")
            - 0.5 * (sparse.kron(identity, kdk, format="csr") + sparse.kron(kdk.T, identity, format="csr"))
        )
    return sparse.csr_matrix(total)


def liouvillian(channels: List[EngineeredChannel], space: Optional[FockSpace] = None) -> Superoperator:
    return Superoperator(sparse_liouvillian(channels, space).toarray())


def propagate_vectorized(rho0: DensityMatrix, L: Superoperator, n_stages: float) -> DensityMatrix:
    """
    unvec(exp(N L) vec(rho0)), Hermitized. N may be fractional (continuous time in units of stages).
    """
    if L.dim != rho0.dim:
        raise ValueError(f"superoperator acts on dim {L.dim}, state has dim {rho0.dim}")
    if n_stages == 0:
        return rho0
    vector = expm_multiply(n_stages * L.matrix, vectorize(rho0.matrix))
    return DensityMatrix(unvectorize(vector, rho0.dim)).hermitized()


def steady_state(L: Superoperator) -> DensityMatrix:
    """
    Unit-trace kernel vector of L from a full eigendecomposition.
    States whose top two levels hold more than the truncation threshold are tagged
    "truncation_dominated" (pure heating piles everything into the top level).
    """
    values, vectors = linalg.eig(L.matrix)
    tolerance = KERNEL_TOL * max(np.linalg.norm(L.matrix, 1), 1.0)
    order = np.argsort(np.abs(values))
    if abs(values[order[0]]) >= tolerance:
        raise DegenerateSteadyStateError(f"Liouvillian has no stationary state, smallest |eigenvalue| "
                                         f"{abs(values[order[0]]):.3e}")
    if len(values) > 1 and abs(values[order[1]]) < tolerance:
        kernel = int(np.sum(np.abs(values) < tolerance))
        raise DegenerateSteadyStateError(f"Liouvillian kernel has dimension {kernel}")

    vector = vectors[:, order[0]]
    matrix = unvectorize(vector, L.dim)
    trace = np.trace(matrix)
    if abs(trace) < 1e-12 * np.linalg.norm(vector):
        raise NonPhysicalStateError("kernel vector of the Liouvillian is traceless")
    state = DensityMatrix(matrix / trace).hermitized()

    min_eig = state.min_eigenvalue
    if min_eig < -POSITIVITY_TOL:
        raise NonPhysicalStateError(f"steady state has eigenvalue {min_eig:.3e}, "
                                    f"increase the truncation or check the channels")
    if min_eig < 0:
        state = state.clamped()

    tail = state.tail_mass(2)
    if tail > TAIL_WARNING_THRESHOLD:
        log.warning("steady state holds %.3e in the top two levels, it is a truncation artifact", tail)
        state = state.with_tags("truncation_dominated")
    return state
