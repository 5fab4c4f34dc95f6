import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy import linalg, stats

from .collision import liouvillian, unvectorize, vectorize
from .fock import DensityMatrix, FockSpace
from .lasers import EngineeredChannel
from .schemas import ResetParams

# get logger:
log = logging.getLogger(__name__)

"""
Two-step optical pumping of the electronic levels |0>, |1>, |2> through the short-lived level |3>.
A reset step drives target_level <-> |3> with Rabi frequency omega_tilde while |3> decays to |0>
at gamma30; for omega_tilde << gamma30 the target population leaves at 4 omega_tilde^2 / gamma30.

The master equation is linear with constant coefficients, so it is propagated with the exact
one-step propagator exp(G dt).
"""

ELECTRONIC_LEVELS = 4
AUXILIARY_LEVEL = 3
DEFAULT_STEP = 0.005
MAX_STEP = 0.01
DEFAULT_SAMPLES = 2000
FIT_WINDOW = (0.05, 0.8)
# per-step duration of full_reset in units of 1/gamma_eff
DEFAULT_STEP_DURATION = 8.0


class ElectronicState(DensityMatrix):
    def __post_init__(self):
        super().__post_init__()
        if self.dim != ELECTRONIC_LEVELS:
            raise ValueError(f"the electronic state has {ELECTRONIC_LEVELS} levels, got dim={self.dim}")

    @classmethod
    def from_populations(cls, populations: Sequence[float]) -> "ElectronicState":
        return cls(np.diag(np.asarray(populations, dtype=float))).validate()


@dataclass(frozen=True, eq=False)
class ResetTrace:
    times: np.ndarray
    states: List[ElectronicState]

    def population(self, level: int) -> np.ndarray:
        return np.array([state.populations()[level] for state in self.states])

    @property
    def final(self) -> ElectronicState:
        return self.states[-1]


def reset_generator(target_level: int, params: ResetParams) -> np.ndarray:
    """
    Column-stacked generator of d rho/dt = -i[H, rho] + D_30(rho)
    with H = omega_tilde (|3><target| + |target><3|)
    """
    if target_level not in (1, 2):
        raise ValueError(f"reset targets level 1 or 2, got {target_level}")
    space = FockSpace(ELECTRONIC_LEVELS)
    identity = space.identity()
    hamiltonian = np.zeros((ELECTRONIC_LEVELS, ELECTRONIC_LEVELS), dtype=complex)
    hamiltonian[AUXILIARY_LEVEL, target_level] = params.omega_tilde
    hamiltonian[target_level, AUXILIARY_LEVEL] = params.omega_tilde
    decay = np.zeros((ELECTRONIC_LEVELS, ELECTRONIC_LEVELS), dtype=complex)
    decay[0, AUXILIARY_LEVEL] = 1.0
    coherent = -1j * (np.kron(identity, hamiltonian) - np.kron(hamiltonian.T, identity))
    dissipative = liouvillian([EngineeredChannel(decay, params.gamma30, "decay 3->0")], space).matrix
    return coherent + dissipative


def reset_step(rho_e: ElectronicState,
               target_level: int,
               params: ResetParams,
               t_end: float,
               dt: Optional[float] = None,
               record_every: Optional[int] = None) -> ResetTrace:
    """
    Pumps target_level into |0>.

    :param rho_e: initial electronic state
    :param target_level: 1 or 2
    :param t_end: duration, in the time unit set by gamma30
    :param dt: step, default 0.005/gamma30, at most 0.01/gamma30
    :param record_every: keep every n-th step, default keeps about 2000 samples
    :return: sampled states starting with rho_e
    """
    if dt is None:
        dt = DEFAULT_STEP / params.gamma30
    if dt <= 0 or t_end <= 0:
        raise ValueError(f"time step and duration must be positive, got dt={dt}, t_end={t_end}")
    if dt > MAX_STEP / params.gamma30 * (1 + 1e-12):
        raise ValueError(f"time step dt={dt} exceeds {MAX_STEP}/gamma30")
    n_steps = int(np.ceil(t_end / dt - 1e-9))
    if record_every is None:
        record_every = max(1, n_steps // DEFAULT_SAMPLES)

    generator = reset_generator(target_level, params)
    stride = linalg.expm(generator * dt * record_every)
    vector = vectorize(rho_e.matrix)
    times = [0.0]
    states = [ElectronicState(rho_e.matrix)]
    step = 0
    while step < n_steps:
        block = min(record_every, n_steps - step)
        propagator = stride if block == record_every else linalg.expm(generator * dt * block)
        vector = propagator @ vector
        step += block
        times.append(step * dt)
        states.append(ElectronicState(unvectorize(vector, ELECTRONIC_LEVELS)))
    log.debug("reset of level %d: %d steps, %d samples", target_level, n_steps, len(states))
    return ResetTrace(np.array(times), states)


def full_reset(rho_e: ElectronicState,
               params: ResetParams,
               t_per_step: Optional[float] = None,
               dt: Optional[float] = None) -> ElectronicState:
    """
    Pumps level 1, then level 2, each for t_per_step (default 8/gamma_eff)
    """
    if t_per_step is None:
        t_per_step = DEFAULT_STEP_DURATION / params.gamma_eff
    state = reset_step(rho_e, 1, params, t_per_step, dt).final
    return reset_step(state, 2, params, t_per_step, dt).final


def fit_decay_rate(trace: ResetTrace, level: int = 1, window=FIT_WINDOW) -> float:
    """
    Decay rate from a linear regression of log(population) over the samples inside window
    """
    population = trace.population(level)
    inside = (population >= window[0]) & (population <= window[1])
    if inside.sum() < 3:
        raise ValueError(f"only {inside.sum()} samples of level {level} fall inside the fit window {window}")
    fit = stats.linregress(trace.times[inside], np.log(population[inside]))
    return float(-fit.slope)


def _first_crossing(times: np.ndarray, values: np.ndarray, level: float, rising: bool) -> float:
    reached = values >= level if rising else values <= level
    if not reached.any():
        raise ValueError(f"population never reaches {level} within the simulated time")
    i = int(np.argmax(reached))
    if i == 0:
        return float(times[0])
    # linear interpolation between the bracketing samples
    t0, t1 = times[i - 1], times[i]
    v0, v1 = values[i - 1], values[i]
    return float(t0 + (level - v0) * (t1 - t0) / (v1 - v0))


def reset_time(params: ResetParams,
               threshold: float = 0.999,
               rho_e: Optional[ElectronicState] = None,
               dt: Optional[float] = None) -> float:
    """
    Time the two-step reset needs to bring rho_00 to threshold: the first step runs until
    rho_11 <= (1 - threshold)/2, the second until rho_00 >= threshold.
    """
    if rho_e is None:
        rho_e = ElectronicState.from_populations([0.0, 0.5, 0.5, 0.0])
    horizon = 2 * DEFAULT_STEP_DURATION / params.gamma_eff
    first = reset_step(rho_e, 1, params, horizon, dt)
    t1 = _first_crossing(first.times, first.population(1), (1.0 - threshold) / 2, rising=False)
    midway = reset_step(rho_e, 1, params, t1, dt).final
    second = reset_step(midway, 2, params, horizon, dt)
    t2 = _first_crossing(second.times, second.population(0), threshold, rising=True)
    return t1 + t2
