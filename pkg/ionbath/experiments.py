import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd

from .collision import evolve, iterate_stages, liouvillian, recursion_step, steady_state, vectorize
from .errors import ConfigError, UnstableStepperError
from .fock import (POSITIVITY_TOL, TAIL_WARNING_THRESHOLD, DensityMatrix, FockSpace, coherent_state,
                   number_state, squeezed_coherent_state, thermal_state, vacuum_state)
from .lasers import EPSILON_GUARD, EngineeredChannel, channel_preset, leading_order_operators, rescale_channel
from .metrics import fidelity, mean_occupation, trace_distance
from .otto import (CHI_DENOMINATOR_GUARD, chi_closed_form, chi_thresholds, efficiency, efficiency_from_chi,
                   energetics_closed, energetics_numeric, otto_reference)
from .output.frames import OttoRow, ResetRow, ResultRow, rows_frame, warnings_text
from .output.summary import RunSummary, library_versions
from .reset import ElectronicState, fit_decay_rate, reset_step
from .schemas import ChannelConfig, ChannelSpec, ExperimentConfig, OttoParams, StateSpec

# get logger:
log = logging.getLogger(__name__)

"""
Here we define the experiments behind the command line subcommands. Each run_* function takes a
validated config and returns the result frames and the run summary; writing them is left to the CLI.
"""

# rows must keep the trace this well or carry a warning
ROW_TRACE_TOL = 1e-9
# slack when comparing fidelities of two runs that agree up to roundoff
FIDELITY_SLACK = 1e-10
RATE_TOLERANCE = 0.05
RESET_TARGET = 0.999
RESET_DRIFT_TOL = 1e-6


@dataclass
class ExperimentResult:
    """
    frames maps a file suffix ("" for the main result file) to its frame
    """
    frames: Dict[str, pd.DataFrame]
    summary: RunSummary


def _plain(value: Any) -> Any:
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _summary(command: str, config: ExperimentConfig, guards: Dict[str, Any], metrics: Dict[str, Any],
             warnings: Iterable[str] = ()) -> RunSummary:
    return RunSummary(
        command=command,
        config=config.dict(),
        versions=library_versions(),
        guards={name: bool(value) for name, value in guards.items()},
        metrics={name: _plain(value) for name, value in metrics.items()},
        warnings=sorted(set(warnings)),
    )


#------------------------
# building blocks from config
#------------------------

def build_state(spec: StateSpec, space: FockSpace) -> DensityMatrix:
    try:
        if spec.kind == "vacuum":
            return vacuum_state(space)
        if spec.kind == "number":
            return number_state(space, spec.n)
        if spec.kind == "coherent":
            return coherent_state(space, spec.alpha)
        if spec.kind == "squeezed":
            return squeezed_coherent_state(space, spec.r, 0.0)
        if spec.kind == "squeezed_coherent":
            return squeezed_coherent_state(space, spec.r, spec.alpha)
        return thermal_state(space, spec.nbar)
    except ValueError as e:
        raise ConfigError(f"state '{spec.kind}': {e}") from e


def channel_specs(channel: ChannelConfig, config: ExperimentConfig) -> List[ChannelSpec]:
    area = channel.pulse_area or config.pulse_area
    if channel.preset is not None:
        return channel_preset(channel.preset, eta=config.eta, pulse_area=area,
                              nbar=channel.nbar, r=channel.r, alpha=channel.alpha)
    # lines without their own eta take the config-level one
    lines = [line if "eta" in line.__fields_set__ else line.copy(update={"eta": config.eta})
             for line in channel.lines]
    return [ChannelSpec(lines=lines, tau_r_omega_r=area)]


def build_channels(config: ExperimentConfig,
                   space: FockSpace,
                   entries: Optional[List[ChannelConfig]] = None,
                   offset: int = 0) -> List[EngineeredChannel]:
    """
    Rescaled channels of the config entries, with epsilon overrides and copies applied

    :param entries: subset of config.channels, all of them by default
    :param offset: index of the first entry within config.channels, for labels and messages
    """
    entries = config.channels if entries is None else entries
    channels = []
    for index, entry in enumerate(entries, start=offset):
        label = entry.preset or "lines"
        try:
            specs = channel_specs(entry, config)
            engineered = [rescale_channel(space, spec, f"{label}[{index}.{k}]") for k, spec in enumerate(specs)]
        except ValueError as e:
            raise ConfigError(f"channels[{index}]: {e}") from e
        if entry.lamb_dicke_limit:
            leading = leading_order_operators(space, entry.preset, r=entry.r, alpha=entry.alpha)
            engineered = [EngineeredChannel(k, channel.epsilon, channel.label)
                          for k, channel in zip(leading, engineered)]
        if entry.epsilon is not None:
            if len(engineered) != 1:
                raise ConfigError(f"channels[{index}]: an epsilon override needs a single-channel entry, "
                                  f"'{label}' gives {len(engineered)} channels")
            engineered = [engineered[0].with_epsilon(entry.epsilon)]
        channels.extend(engineered * entry.copies)
    return channels


def _physical(rho: DensityMatrix) -> DensityMatrix:
    return rho.clamped() if rho.min_eigenvalue < 0 else rho


def state_row(N: Optional[int],
              rho: DensityMatrix,
              initial: DensityMatrix,
              target: Optional[DensityMatrix]) -> ResultRow:
    """
    Diagnostics of one state; fidelities are taken on its PSD projection
    """
    messages = []
    min_eig = rho.min_eigenvalue
    if min_eig < -POSITIVITY_TOL:
        messages.append(f"negative eigenvalue {min_eig:.3e}")
    if rho.trace_error > ROW_TRACE_TOL:
        messages.append(f"trace error {rho.trace_error:.3e}")
    tail = rho.tail_mass(2)
    if tail > TAIL_WARNING_THRESHOLD:
        messages.append(f"truncation tail {tail:.3e}")
    physical = _physical(rho)
    return ResultRow(
        N=N,
        fidelity_inf=fidelity(physical, target) if target is not None else None,
        fidelity_0=fidelity(physical, initial),
        mean_occupation=mean_occupation(rho),
        trace_error=rho.trace_error,
        min_eigenvalue=min_eig,
        tail_mass=tail,
        warnings=warnings_text(messages),
    )


def first_stage_above(rows: List[ResultRow], threshold: float) -> Optional[int]:
    for row in rows:
        if row.fidelity_inf is not None and row.fidelity_inf > threshold:
            return row.N
    return None


def _row_guards(rows: List[ResultRow]) -> Dict[str, bool]:
    return {
        "trace_preserved": all(row.trace_error <= ROW_TRACE_TOL for row in rows),
        "positive_semidefinite": all(row.min_eigenvalue >= -POSITIVITY_TOL for row in rows),
        "truncation_tail_small": all(row.tail_mass <= TAIL_WARNING_THRESHOLD for row in rows),
    }


def _row_warnings(rows: List[ResultRow], label: str) -> List[str]:
    flagged = [row for row in rows if row.warnings]
    if not flagged:
        return []
    log.warning("%s: %d of %d rows carry warnings, first at N=%s: %s",
                label, len(flagged), len(rows), flagged[0].N, flagged[0].warnings)
    return [f"{label}: {len(flagged)} rows flagged, first at N={flagged[0].N}: {flagged[0].warnings}"]


def _evolve_rows(initial: DensityMatrix,
                 channels: List[EngineeredChannel],
                 target: Optional[DensityMatrix],
                 config: ExperimentConfig) -> List[ResultRow]:
    try:
        return [state_row(N, rho, initial, target)
                for N, rho in enumerate(iterate_stages(initial, channels, config.n_stages, config.stepper))]
    except UnstableStepperError as e:
        raise ConfigError(str(e)) from e


def _epsilon_metrics(channels: List[EngineeredChannel]) -> Dict[str, Any]:
    return {f"epsilon[{k}]": channel.epsilon for k, channel in enumerate(channels)}


#------------------------
# experiments
#------------------------

def run_synth(config: ExperimentConfig) -> ExperimentResult:
    """
    Evolves the initial state through n_stages engineering stages and tracks the fidelity to the
    target (the steady state of the channels when no target is given) and to the initial state.
    """
    space = FockSpace(config.dim)
    channels = build_channels(config, space)
    if not channels:
        raise ConfigError("synth needs at least one channel")
    initial = build_state(config.initial_state, space)
    if config.target_state is not None:
        target = build_state(config.target_state, space)
    else:
        log.info("No target state given, using the steady state of the channels")
        target = steady_state(liouvillian(channels, space))

    rows = _evolve_rows(initial, channels, target, config)
    first = first_stage_above(rows, config.threshold)
    guards = _row_guards(rows)
    guards["epsilon_within_guard"] = all(channel.epsilon <= EPSILON_GUARD for channel in channels)
    metrics = {
        "first_stage_above_threshold": first,
        "threshold": config.threshold,
        "final_fidelity_inf": rows[-1].fidelity_inf,
        "final_fidelity_0": rows[-1].fidelity_0,
        "final_mean_occupation": rows[-1].mean_occupation,
        **_epsilon_metrics(channels),
    }
    summary = _summary("synth", config, guards, metrics, _row_warnings(rows, "synth"))
    return ExperimentResult({"": rows_frame(rows, ResultRow)}, summary)


def run_protect(config: ExperimentConfig) -> ExperimentResult:
    """
    The first channel entry dissipates, the remaining entries protect the initial state.
    The unprotected reference run (first entry only) goes to the "reference" frame.
    """
    space = FockSpace(config.dim)
    if not config.channels:
        raise ConfigError("protect needs a dissipation channel")
    dissipation = build_channels(config, space, config.channels[:1])
    protection = build_channels(config, space, config.channels[1:], offset=1)
    initial = build_state(config.initial_state, space)
    target = build_state(config.target_state, space) if config.target_state is not None else None

    protected = _evolve_rows(initial, dissipation + protection, target, config)
    reference = _evolve_rows(initial, dissipation, target, config)
    not_worse = all(p.fidelity_0 >= u.fidelity_0 - FIDELITY_SLACK for p, u in zip(protected, reference))
    decreasing = all(later.fidelity_0 <= earlier.fidelity_0 + FIDELITY_SLACK
                     for earlier, later in zip(reference, reference[1:]))
    if not not_worse:
        log.warning("protected run falls below the unprotected reference")

    guards = _row_guards(protected)
    guards["protected_not_worse"] = not_worse
    metrics = {
        "final_fidelity_0_protected": protected[-1].fidelity_0,
        "final_fidelity_0_unprotected": reference[-1].fidelity_0,
        "unprotected_fidelity_0_decreasing": decreasing,
        **_epsilon_metrics(dissipation + protection),
    }
    warnings = _row_warnings(protected, "protected") + _row_warnings(reference, "unprotected")
    summary = _summary("protect", config, guards, metrics, warnings)
    return ExperimentResult({"": rows_frame(protected, ResultRow), "reference": rows_frame(reference, ResultRow)},
                            summary)


def run_steady(config: ExperimentConfig) -> ExperimentResult:
    space = FockSpace(config.dim)
    channels = build_channels(config, space)
    if not channels:
        raise ConfigError("steady needs at least one channel")
    L = liouvillian(channels, space)
    state = steady_state(L)
    initial = build_state(config.initial_state, space)
    target = build_state(config.target_state, space) if config.target_state is not None else None

    row = state_row(None, state, initial, target)
    residual = float(np.max(np.abs(L.matrix @ vectorize(state.matrix))))
    fixed_point = trace_distance(recursion_step(state, channels), state)
    guards = _row_guards([row])
    guards["fixed_point_of_recursion"] = fixed_point <= 1e-9
    metrics = {
        "fidelity_to_target": row.fidelity_inf,
        "kernel_residual": residual,
        "recursion_fixed_point_distance": fixed_point,
        "truncation_dominated": "truncation_dominated" in state.tags,
        "mean_occupation": row.mean_occupation,
        **_epsilon_metrics(channels),
    }
    warnings = ["steady state is a truncation artifact"] if "truncation_dominated" in state.tags else []
    summary = _summary("steady", config, guards, metrics, warnings + _row_warnings([row], "steady"))
    return ExperimentResult({"": rows_frame([row], ResultRow)}, summary)


def run_reset(config: ExperimentConfig) -> ExperimentResult:
    """
    Two-step reset of the configured electronic populations, plus a rate fit from |1><1|
    """
    if config.reset is None:
        raise ConfigError("reset needs a 'reset' block")
    block = config.reset
    params = block.params
    duration = block.t_per_step or 8.0 / params.gamma_eff
    state = ElectronicState.from_populations(block.initial_populations)

    rows = []
    start = 0.0
    drift = 0.0
    max_trace_error = 0.0
    for step, level in enumerate((1, 2), start=1):
        trace = reset_step(state, level, params, duration, block.dt, block.record_every)
        if level == 1:
            rho22 = trace.population(2)
            drift = float(np.max(np.abs(rho22 - rho22[0])))
        for time, sample in zip(trace.times, trace.states):
            p = sample.populations()
            max_trace_error = max(max_trace_error, sample.trace_error)
            rows.append(ResetRow(step=step, time=start + float(time), rho00=p[0], rho11=p[1], rho22=p[2],
                                 rho33=p[3], trace_error=sample.trace_error))
        start += duration
        state = trace.final

    reference = reset_step(ElectronicState.from_populations([0.0, 1.0, 0.0, 0.0]), 1, params, duration,
                           block.dt, block.record_every)
    rate = fit_decay_rate(reference, 1)
    deviation = abs(rate - params.gamma_eff) / params.gamma_eff
    final_rho00 = float(state.populations()[0])

    guards = {
        "rate_matches_effective": deviation <= RATE_TOLERANCE,
        "reset_complete": final_rho00 >= RESET_TARGET,
        "trace_preserved": max_trace_error <= 1e-8,
        "decoupled_level_stationary": drift < RESET_DRIFT_TOL,
    }
    metrics = {
        "fitted_rate": rate,
        "gamma_eff": params.gamma_eff,
        "relative_deviation": deviation,
        "final_rho00": final_rho00,
        "rho22_drift_first_step": drift,
        "t_per_step": duration,
    }
    warnings = [] if guards["rate_matches_effective"] else [
        f"fitted rate deviates by {deviation:.1%} from 4 omega^2/gamma"]
    summary = _summary("reset", config, guards, metrics, warnings)
    return ExperimentResult({"": rows_frame(rows, ResetRow)}, summary)


def synthesize_cycle_states(params: OttoParams, config: ExperimentConfig,
                            space: FockSpace) -> Tuple[DensityMatrix, DensityMatrix]:
    """
    States at A and C produced by engineering stages from the vacuum instead of written down directly
    """
    n_stages = config.otto.n_stages
    try:
        if params.nbar_A > 0:
            specs_A = channel_preset("thermal_pair", eta=config.eta, pulse_area=config.pulse_area, nbar=params.nbar_A)
        else:
            specs_A = channel_preset("cooling", eta=config.eta, pulse_area=config.pulse_area)
        specs_C = channel_preset("coherent", eta=config.eta, pulse_area=config.pulse_area, alpha=params.alpha)
    except ValueError as e:
        raise ConfigError(f"otto --synthesize: {e}") from e
    vacuum = vacuum_state(space)
    states = []
    for label, specs in (("A", specs_A), ("C", specs_C)):
        channels = [rescale_channel(space, spec, f"{label}[{k}]") for k, spec in enumerate(specs)]
        states.append(evolve(vacuum, channels, n_stages).final)
    return states[0], states[1]


def _otto_point(coordinate: float,
                params: OttoParams,
                config: ExperimentConfig,
                space: FockSpace,
                numeric: bool,
                synthesize: bool,
                cache: Dict[Tuple, Tuple[DensityMatrix, DensityMatrix]]) -> OttoRow:
    messages = []
    closed = energetics_closed(params)
    gap = params.nbar_A - params.nbar_C
    gap_sign = int(np.sign(gap)) if abs(gap) >= CHI_DENOMINATOR_GUARD else 0
    chi = chi_closed_form(params) if gap_sign else None
    if chi is None:
        messages.append("chi undefined at nbar_A = |alpha|^2")
    result = efficiency(params, closed)
    reference = otto_reference(params.nu0, params.nu1)
    zeta = complex(params.zeta_over_nu1)
    row = dict(
        coordinate=coordinate, zeta_re=zeta.real, zeta_im=zeta.imag, gap_sign=gap_sign, chi=chi,
        efficiency=result.value, efficiency_otto=reference, regime=result.regime,
        surpasses_otto=result.value is not None and result.value > reference,
        W=closed.W_total, Q2=closed.Q2, Q4=closed.Q4,
    )
    if numeric or synthesize:
        key = (params.nbar_A, complex(params.alpha))
        if key not in cache:
            if synthesize:
                cache[key] = synthesize_cycle_states(params, config, space)
            else:
                cache[key] = (thermal_state(space, params.nbar_A), coherent_state(space, params.alpha))
        rho_A, rho_C = cache[key]
        traced = energetics_numeric(rho_A, rho_C, params, space)
        if abs(traced.closure) > 1e-9:
            messages.append(f"cycle closure {traced.closure:.3e}")
        for label, state in (("rho_A", rho_A), ("rho_C", rho_C)):
            if state.tail_mass(2) > TAIL_WARNING_THRESHOLD:
                messages.append(f"{label} truncation tail {state.tail_mass(2):.3e}")
        row.update(
            W_numeric=traced.W_total, Q2_numeric=traced.Q2, Q4_numeric=traced.Q4,
            efficiency_numeric=efficiency(params, traced).value,
            max_difference=max(abs(traced.W1 - closed.W1), abs(traced.Q2 - closed.Q2),
                               abs(traced.W3 - closed.W3), abs(traced.Q4 - closed.Q4)),
            nbar_C_difference=mean_occupation(rho_C) - params.nbar_C,
        )
        if synthesize:
            ideal_A = thermal_state(space, params.nbar_A)
            ideal_C = coherent_state(space, params.alpha)
            row.update(fidelity_A=fidelity(_physical(rho_A), ideal_A), fidelity_C=fidelity(_physical(rho_C), ideal_C))
    return OttoRow(warnings=warnings_text(messages), **row)


def _chi_rows(params: OttoParams, grid: np.ndarray) -> List[OttoRow]:
    reference = otto_reference(params.nu0, params.nu1)
    thresholds = chi_thresholds(params.nu0, params.nu1)
    zeta = complex(params.zeta_over_nu1)
    rows = []
    for chi in grid:
        for gap_sign in (1, -1):
            result = efficiency_from_chi(chi, params.nu0, params.nu1, gap_sign)
            surpasses = result.value is not None and result.value > reference
            rows.append(OttoRow(
                coordinate=float(chi), zeta_re=zeta.real, zeta_im=zeta.imag, gap_sign=gap_sign, chi=float(chi),
                efficiency=result.value, efficiency_otto=reference, regime=result.regime, surpasses_otto=surpasses,
                warnings="" if surpasses == thresholds.surpasses(chi, gap_sign) else "threshold region mismatch",
            ))
    return rows


def run_otto(config: ExperimentConfig, numeric: bool = False, synthesize: bool = False) -> ExperimentResult:
    """
    Efficiency of the quench-regime Otto cycle at one point or along a sweep of chi,
    Im(alpha) (one curve per zeta value) or nu1/nu0
    """
    if config.otto is None:
        raise ConfigError("otto needs an 'otto' block")
    params = config.otto.params
    sweep = config.otto.sweep
    space = FockSpace(config.dim)
    cache: Dict[Tuple, Tuple[DensityMatrix, DensityMatrix]] = {}

    if sweep is not None and sweep.variable == "chi":
        rows = _chi_rows(params, sweep.grid())
    elif sweep is None:
        rows = [_otto_point(0.0, params, config, space, numeric, synthesize, cache)]
    elif sweep.variable == "alpha_imag":
        zetas = sweep.zeta_values or [params.zeta_over_nu1]
        rows = [_otto_point(float(x), params.copy(update={"alpha": 1j * float(x), "zeta_over_nu1": complex(zeta)}),
                            config, space, numeric, synthesize, cache)
                for zeta in zetas for x in sweep.grid()]
    else:
        rows = [_otto_point(float(x), params.copy(update={"nu1": float(x) * params.nu0}),
                            config, space, numeric, synthesize, cache)
                for x in sweep.grid()]

    thresholds = chi_thresholds(params.nu0, params.nu1)
    differences = [row.max_difference for row in rows if row.max_difference is not None]
    guards = {
        "threshold_regions_consistent": all(row.warnings != "threshold region mismatch" for row in rows),
        "engine_somewhere": any(row.efficiency is not None for row in rows),
    }
    if differences:
        guards["numeric_matches_closed"] = max(differences) <= 1e-6
    metrics = {
        "chi_surpass_high": thresholds.chi_surpass_high,
        "chi_surpass_low": thresholds.chi_surpass_low,
        "chi_zero_work": thresholds.chi_zero_work,
        "efficiency_otto": otto_reference(params.nu0, params.nu1),
        "points_surpassing_otto": sum(row.surpasses_otto for row in rows),
        "max_numeric_difference": max(differences) if differences else None,
    }
    warnings = sorted({row.warnings for row in rows if row.warnings})
    summary = _summary("otto", config, guards, metrics, warnings)
    return ExperimentResult({"": rows_frame(rows, OttoRow)}, summary)
