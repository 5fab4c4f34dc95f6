import logging
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .collision import (EXPANDED_STEPPERS, STIFFNESS_LIMIT, exact_joint_step, iterate_stages, kraus_step, liouvillian,
                        recursion_step, semigroup_residual, steady_state, stiffness, unvectorize, vectorize)
from .errors import UnstableStepperError
from .experiments import build_channels, build_state
from .fock import (POSITIVITY_TOL, DensityMatrix, FockSpace, annihilation, coherent_state, number_state,
                   squeezed_coherent_state, thermal_state, vacuum_state)
from .lasers import EngineeredChannel, channel_preset, leading_order_operators, rescale_channel
from .metrics import fidelity, trace_distance
from .otto import chi_thresholds, efficiency_from_chi, energetics_closed, energetics_numeric, otto_reference
from .reset import ElectronicState, fit_decay_rate, reset_step
from .schemas import ExperimentConfig, OttoParams, ResetParams

# get logger:
log = logging.getLogger(__name__)

"""
Built-in invariant suite. Every check measures a residual and compares it with a bound;
checks of a user supplied config only warn.
"""

SEED = 20210301
ETA = 0.05
PULSE_AREA = 4.5


@dataclass(frozen=True)
class Check:
    name: str
    status: str
    residual: float
    bound: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status != "fail"


def _check(name: str, residual: float, bound: float, detail: str = "", passed: Optional[bool] = None) -> Check:
    ok = residual <= bound if passed is None else passed
    return Check(name, "pass" if ok else "fail", float(residual), float(bound), detail)


def random_state(space: FockSpace, rng: np.random.Generator, rank: Optional[int] = None) -> DensityMatrix:
    """
    Random full-rank (or rank-limited) density matrix from a complex Gaussian matrix
    """
    rank = rank or space.dim
    g = rng.normal(size=(space.dim, rank)) + 1j * rng.normal(size=(space.dim, rank))
    matrix = g @ g.conj().T
    return DensityMatrix(matrix / np.trace(matrix))


def random_unitary(space: FockSpace, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(space.dim, space.dim)) + 1j * rng.normal(size=(space.dim, space.dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


#------------------------
# state synthesis runs
#------------------------

def _synthesis_runs(space: FockSpace):
    """
    (label, initial state, channels, stages) of the synthesis experiments
    """
    def rescaled(kind, copies=1, **params):
        specs = channel_preset(kind, eta=ETA, pulse_area=PULSE_AREA, **params)
        return [rescale_channel(space, spec, kind) for spec in specs] * copies

    vacuum = vacuum_state(space)
    runs = [(f"thermal nbar={nbar} from vacuum", vacuum, rescaled("thermal_pair", nbar=nbar), 80)
            for nbar in (0.25, 0.5, 1.0)]
    runs.append(("thermal nbar=0.25 from coherent 0.6i", coherent_state(space, 0.6j),
                 rescaled("thermal_pair", nbar=0.25), 120))
    for copies in (1, 2):
        runs.append((f"squeezed coherent, {copies} bath(s)", vacuum,
                     rescaled("squeezed_coherent", copies=copies, r=0.11, alpha=0.48j), 80))
    return runs


def check_synthesis_invariants() -> List[Check]:
    space = FockSpace(40)
    checks = []
    for label, initial, channels, n_stages in _synthesis_runs(space):
        worst_trace = worst_hermiticity = 0.0
        worst_eig = 0.0
        for rho in iterate_stages(initial, channels, n_stages):
            worst_trace = max(worst_trace, rho.trace_error)
            worst_hermiticity = max(worst_hermiticity, rho.hermiticity_error)
            worst_eig = min(worst_eig, rho.min_eigenvalue)
        checks.append(_check(f"trace: {label}", worst_trace, 1e-10))
        checks.append(_check(f"hermiticity: {label}", worst_hermiticity, 1e-12))
        checks.append(_check(f"positivity: {label}", -worst_eig, POSITIVITY_TOL, f"min eigenvalue {worst_eig:.3e}"))

    label, initial, channels, _ = _synthesis_runs(space)[0]
    value = stiffness(channels, space)
    try:
        next(iterate_stages(initial, channels, 1, "recursion"))
        refused = False
    except UnstableStepperError:
        refused = True
    checks.append(_check(f"recursion refused at dim {space.dim}: {label}", value, STIFFNESS_LIMIT,
                         f"stiffness {value:.3f}", passed=refused and value > STIFFNESS_LIMIT))

    small = FockSpace(10)
    label, initial, channels, n_stages = _synthesis_runs(small)[-2]
    worst_eig = min(rho.min_eigenvalue for rho in iterate_stages(initial, channels, n_stages, "kraus"))
    checks.append(_check(f"positivity (kraus, dim {small.dim}): {label}", -worst_eig, POSITIVITY_TOL))
    return checks


#------------------------
# collision model
#------------------------

def check_semigroup() -> List[Check]:
    rng = np.random.default_rng(SEED)
    space = FockSpace(8)
    epsilon = 1e-3
    a = annihilation(space)
    channels = [EngineeredChannel(a, epsilon, "cooling")]
    bound = 4 * epsilon ** 2 * np.linalg.norm(a.conj().T @ a, 2) ** 2
    residual = max(semigroup_residual(random_state(space, rng), channels) for _ in range(20))
    return [_check("semigroup (kraus, 20 random states)", residual, bound)]


def kraus_versus_exact(pulse_area: float, space: FockSpace) -> float:
    spec = channel_preset("cooling", eta=ETA, pulse_area=pulse_area)[0]
    rho = number_state(space, 1)
    exact = exact_joint_step(rho, [spec], d_levels=3)
    expanded = kraus_step(rho, [rescale_channel(space, spec)])
    return trace_distance(exact, expanded)


def check_collisional_expansion() -> List[Check]:
    space = FockSpace(20)
    coarse = kraus_versus_exact(0.1, space)
    fine = kraus_versus_exact(0.05, space)
    factor = coarse / fine
    return [
        _check("kraus vs exact joint step at pulse area 0.1", coarse, 1e-3),
        _check("kraus vs exact halving factor (fourth order)", factor, 20.0,
               f"factor {factor:.2f}", passed=12.0 <= factor <= 20.0),
    ]


def check_liouvillian_equivalence() -> List[Check]:
    rng = np.random.default_rng(SEED + 1)
    space = FockSpace(10)
    a = annihilation(space)
    channels = [EngineeredChannel(a, 0.05), EngineeredChannel(a + 0.3 * a.conj().T, 0.02)]
    rho = random_state(space, rng)
    L = liouvillian(channels, space)
    euler = unvectorize(vectorize(rho.matrix) + L.matrix @ vectorize(rho.matrix), space.dim)
    residual = float(np.max(np.abs(euler - recursion_step(rho, channels).matrix)))
    return [_check("recursion equals one Euler step of the Liouvillian", residual, 1e-13)]


def check_steady_states() -> List[Check]:
    space = FockSpace(40)
    a = annihilation(space)
    ad = a.conj().T
    checks = []
    cooling = steady_state(liouvillian([EngineeredChannel(a, 0.05)], space))
    checks.append(_check("steady state of cooling is the vacuum",
                         1 - fidelity(cooling, vacuum_state(space)), 1e-9))
    squeezing = steady_state(liouvillian([EngineeredChannel(a + np.tanh(0.5) * ad, 0.05)], space))
    checks.append(_check("steady state of squeezing r=0.5",
                         1 - fidelity(squeezing, squeezed_coherent_state(space, 0.5)), 1e-6))
    pair = steady_state(liouvillian([EngineeredChannel(a, 0.05), EngineeredChannel(ad, 0.01)], space))
    checks.append(_check("steady state of the thermal pair nbar=0.25",
                         1 - fidelity(pair, thermal_state(space, 0.25)), 1e-8))
    channels = [rescale_channel(space, spec)
                for spec in channel_preset("squeezed_coherent", eta=ETA, pulse_area=PULSE_AREA, r=0.11, alpha=0.48j)]
    displaced = steady_state(liouvillian(channels, space))
    checks.append(_check("steady state of the squeezed coherent lasers (Lamb-Dicke corrected)",
                         1 - fidelity(displaced, squeezed_coherent_state(space, 0.11, 0.48j)), 1e-5))
    checks.append(_check("steady state is a fixed point of the recursion",
                         trace_distance(recursion_step(displaced, channels), displaced), 1e-9))
    return checks


def check_lamb_dicke_presets() -> List[Check]:
    space = FockSpace(10)
    checks = []
    cases = [("cooling", {}), ("heating", {}), ("coherent", {"alpha": 0.6j}), ("squeezed", {"r": 0.11}),
             ("squeezed_coherent", {"r": 0.11, "alpha": 0.48j}), ("thermal_pair", {"nbar": 0.25})]
    for kind, params in cases:
        specs = channel_preset(kind, eta=ETA, pulse_area=PULSE_AREA, **params)
        targets = leading_order_operators(space, kind, r=params.get("r"), alpha=params.get("alpha"))
        worst = 0.0
        for spec, target in zip(specs, targets):
            computed = rescale_channel(space, spec).k_prime
            worst = max(worst, np.max(np.abs(computed - target)) / np.max(np.abs(target)))
        checks.append(_check(f"Lamb-Dicke consistency of preset {kind}", worst, 5 * ETA ** 2))
    return checks


#------------------------
# metrics
#------------------------

def check_fidelity_properties() -> List[Check]:
    rng = np.random.default_rng(SEED + 2)
    space = FockSpace(6)
    sandwich = symmetry = unitary = 0.0
    for _ in range(100):
        rho, sigma = random_state(space, rng), random_state(space, rng, rank=2)
        f = fidelity(rho, sigma)
        d = trace_distance(rho, sigma)
        sandwich = max(sandwich, (1 - np.sqrt(f)) - d, d - np.sqrt(1 - f))
        symmetry = max(symmetry, abs(f - fidelity(sigma, rho)))
        u = random_unitary(space, rng)
        rotated = fidelity(DensityMatrix(u @ rho.matrix @ u.conj().T), DensityMatrix(u @ sigma.matrix @ u.conj().T))
        unitary = max(unitary, abs(rotated - f))
    return [
        _check("Fuchs-van de Graaf sandwich (100 random pairs)", sandwich, 1e-9),
        _check("fidelity symmetry", symmetry, 1e-9),
        _check("fidelity unitary invariance", unitary, 1e-9),
    ]


#------------------------
# reset and Otto cycle
#------------------------

def check_reset() -> List[Check]:
    checks = []
    for drive in (0.02, 0.05):
        params = ResetParams(omega_tilde=drive, gamma30=1.0)
        trace = reset_step(ElectronicState.from_populations([0, 1, 0, 0]), 1, params, 8 / params.gamma_eff)
        deviation = abs(fit_decay_rate(trace) - params.gamma_eff) / params.gamma_eff
        checks.append(_check(f"reset rate at omega/gamma={drive}", deviation, 0.05))
    params = ResetParams(omega_tilde=0.05, gamma30=1.0)
    start = ElectronicState.from_populations([0, 0.5, 0.5, 0])
    first = reset_step(start, 1, params, 8 / params.gamma_eff)
    drift = float(np.max(np.abs(first.population(2) - 0.5)))
    second = reset_step(first.final, 2, params, 8 / params.gamma_eff)
    checks.append(_check("rho22 drift during the first reset step", drift, 1e-6))
    checks.append(_check("rho00 after the two-step reset", 1 - second.final.populations()[0], 1e-3))
    checks.append(_check("reset trace preservation",
                         max(state.trace_error for state in first.states + second.states), 1e-8))
    return checks


def check_otto() -> List[Check]:
    space = FockSpace(60)
    worst = closure = 0.0
    for nbar in (0.1, 0.25, 0.5):
        rho_A = thermal_state(space, nbar)
        for alpha_imag in (0.2, 0.4, 0.6):
            rho_C = coherent_state(space, 1j * alpha_imag)
            for zeta in (0.0, 0.1j, 0.2j):
                params = OttoParams(nu0=1.0, nu1=0.8, zeta_over_nu1=zeta, nbar_A=nbar, alpha=1j * alpha_imag)
                closed = energetics_closed(params)
                traced = energetics_numeric(rho_A, rho_C, params, space)
                worst = max(worst, abs(closed.W1 - traced.W1), abs(closed.Q2 - traced.Q2),
                            abs(closed.W3 - traced.W3), abs(closed.Q4 - traced.Q4))
                closure = max(closure, abs(closed.closure), abs(traced.closure))
    checks = [
        _check("Otto energetics numeric vs closed (27 points)", worst, 1e-6),
        _check("Otto cycle closure", closure, 1e-9),
    ]
    mismatches = 0
    for ratio in (0.6, 0.8, 5.0 / 3.0):
        thresholds = chi_thresholds(1.0, ratio)
        reference = otto_reference(1.0, ratio)
        for chi in np.linspace(-3.0, 2.0, 100):
            for sign in (1, -1):
                result = efficiency_from_chi(chi, 1.0, ratio, sign)
                surpasses = result.value is not None and result.value > reference
                mismatches += surpasses != thresholds.surpasses(chi, sign)
    checks.append(_check("efficiency regions agree with chi thresholds", mismatches, 0))
    return checks


SUITE: List[Callable[[], List[Check]]] = [
    check_synthesis_invariants,
    check_semigroup,
    check_collisional_expansion,
    check_liouvillian_equivalence,
    check_steady_states,
    check_lamb_dicke_presets,
    check_fidelity_properties,
    check_reset,
    check_otto,
]


def check_config(config: ExperimentConfig) -> List[Check]:
    """
    Runs the channels of a user config from its initial state; problems are reported as warnings.
    An expanded stepper that would diverge is reported instead of run.
    """
    space = FockSpace(config.dim)
    channels = build_channels(config, space)
    initial = build_state(config.initial_state, space)
    measured = []
    if config.stepper in EXPANDED_STEPPERS:
        measured.append(("config stepper stability", stiffness(channels, space), STIFFNESS_LIMIT))
    if not measured or measured[0][1] <= STIFFNESS_LIMIT:
        stages = iterate_stages(initial, channels, config.n_stages, config.stepper)
        measured.append(("config positivity", -min(rho.min_eigenvalue for rho in stages), POSITIVITY_TOL))
    measured.append(("config epsilon guard", max((channel.epsilon for channel in channels), default=0.0), 0.1))
    checks = []
    for name, residual, bound in measured:
        status = "pass" if residual <= bound else "warn"
        if status == "warn":
            log.warning("%s: residual %.3e above %.3e", name, residual, bound)
        checks.append(Check(name, status, float(residual), float(bound)))
    return checks


def run_suite(extra_config: Optional[ExperimentConfig] = None) -> List[Check]:
    checks = []
    for group in SUITE:
        log.info("Running %s", group.__name__)
        checks.extend(group())
    if extra_config is not None:
        checks.extend(check_config(extra_config))
    return checks


def format_report(checks: List[Check]) -> str:
    width = max(len(check.name) for check in checks)
    lines = [f"{check.status.upper():<5} {check.name:<{width}}  residual={check.residual:.3e}  "
             f"bound={check.bound:.3e}  {check.detail}".rstrip() for check in checks]
    failed = sum(not check.passed for check in checks)
    lines.append(f"{len(checks) - failed} of {len(checks)} checks passed")
    return "\n".join(lines)
