"""The proposed design and its benchmark variants, run on a common channel realization."""
from __future__ import annotations

from enum import Enum

import numpy as np

from .channel import FrequencyChannels
from .circuit import CircuitParams
from .optim.pipeline import (SolveReport, alternating_optimize, gains_of, realize,
                             solve_end_to_end, target_capacitances)
from .optim.init import init_reflection_closed_form, init_reflection_sdr
from .optim.projection import project_capacitance
from .optim.reflection import ReflectionSet


class SchemeId(str, Enum):
    PROPOSED = "proposed"
    CHANNEL_POWER_MAX = "channel_power_max"
    FREQ_INDEPENDENT = "freq_independent"
    DIAGONAL = "diagonal"
    RECIPROCAL = "reciprocal"


ALL_SCHEMES = tuple(s.value for s in SchemeId)


def _common_start(ch: FrequencyChannels, init: ReflectionSet) -> ReflectionSet:
    gains = [np.sum(gains_of(ch, np.broadcast_to(P_n, init.Phi.shape))) for P_n in init.Phi]
    best = init.Phi[int(np.argmax(gains))]
    return ReflectionSet(np.repeat(best[None], ch.N, axis=0), "common")


def run_freq_independent(ch: FrequencyChannels, P: float, noise: float, params: CircuitParams,
                         freqs, f_c: float, *, tol: float = 1e-4, max_outer: int = 30) -> SolveReport:
    """Single reflection for every subcarrier; its capacitance is recovered at ``f_c``.

    The circuit rate re-evaluates that capacitance across the whole band, which
    is what a physical capacitor bank would do.
    """
    start = _common_start(ch, init_reflection_closed_form(ch))
    ao = alternating_optimize(ch, P, noise, start, tol=tol, max_outer=max_outer)
    targets, notes = target_capacitances(ao.reflections.Phi[:1], params, [f_c])
    proj = project_capacitance(targets)
    Phi_c, power_c, bits = realize(ch, proj.C, params, freqs, P, noise)
    its = {"ao": len(ao.trace), "sca": ao.sca_iterations, "projection": proj.iterations}
    return SolveReport(ao.trace, ao.objective, proj.C, bits, power_c, its, ao.reflections, Phi_c, notes)


def run_scheme(scheme: str | SchemeId, ch: FrequencyChannels, P: float, noise: float,
               params: CircuitParams, freqs, *, f_c: float | None = None, init: str = "closed_form",
               Q: int = 50, rng: np.random.Generator | None = None, tol: float = 1e-4,
               max_outer: int = 30) -> SolveReport:
    scheme = SchemeId(scheme)
    freqs = np.asarray(freqs, dtype=float)
    common = dict(init=init, Q=Q, rng=rng, tol=tol, max_outer=max_outer)
    if scheme is SchemeId.PROPOSED:
        return solve_end_to_end(ch, P, noise, params, freqs, structure="full", **common)
    if scheme is SchemeId.CHANNEL_POWER_MAX:
        return solve_end_to_end(ch, P, noise, params, freqs, structure="full", skip_ao=True, **common)
    if scheme is SchemeId.RECIPROCAL:
        return solve_end_to_end(ch, P, noise, params, freqs, structure="symmetric", symmetric_C=True, **common)
    if scheme is SchemeId.FREQ_INDEPENDENT:
        if f_c is None:
            f_c = float(np.mean(freqs))
        return run_freq_independent(ch, P, noise, params, freqs, f_c, tol=tol, max_outer=max_outer)
    # diagonal: relaxed rate only, there is no single-connected circuit model to project onto
    if init == "sdr":
        start = init_reflection_sdr(ch, Q=Q, rng=rng).reflections
    else:
        start = init_reflection_closed_form(ch)
    from .optim.pipeline import _restructure
    ao = alternating_optimize(ch, P, noise, _restructure(ch, start, "diagonal"), tol=tol, max_outer=max_outer)
    return SolveReport(ao.trace, ao.objective, None, None, ao.power,
                       {"ao": len(ao.trace), "sca": ao.sca_iterations}, ao.reflections, None,
                       ["relaxed rate only: no circuit realization for the diagonal IRS"])


def reported_rate(report: SolveReport) -> float:
    """Rate used for scheme comparison: circuit-feasible when available, else relaxed."""
    return report.circuit_rate if report.circuit_rate is not None else report.relaxed_rate
