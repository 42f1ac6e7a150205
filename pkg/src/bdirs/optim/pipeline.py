"""Alternating optimization and circuit-feasible solution construction."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..channel import FrequencyChannels, effective_channels
from ..circuit import (CircuitParams, DegenerateReflectionError, admittance_from_reflection,
                       capacitance_from_admittance, circuit_reflections)
from .init import init_reflection_closed_form, init_reflection_sdr
from .projection import project_capacitance
from .reflection import ReflectionSet, sca_reflection, true_objective
from .waterfill import PowerAllocation, waterfill

log = logging.getLogger(__name__)


@dataclass
class AOResult:
    reflections: ReflectionSet
    power: PowerAllocation
    trace: list
    sca_iterations: list
    converged: bool
    objective: float


@dataclass
class SolveReport:
    relaxed_rate_trace: list
    relaxed_rate: float          # bits per OFDM symbol (sum over subcarriers)
    C: np.ndarray | None
    circuit_rate: float | None   # bits per OFDM symbol after projection and re-water-filling
    power: PowerAllocation
    iterations: dict = field(default_factory=dict)
    reflections: ReflectionSet | None = None
    circuit_Phi: np.ndarray | None = None
    notes: list = field(default_factory=list)

    def normalized(self, N: int, N_CP: int, circuit: bool = True) -> float:
        rate = self.circuit_rate if circuit and self.circuit_rate is not None else self.relaxed_rate
        return rate / (N + N_CP)


def gains_of(ch: FrequencyChannels, Phi: np.ndarray) -> np.ndarray:
    return np.abs(effective_channels(ch, Phi)) ** 2


def alternating_optimize(ch: FrequencyChannels, P: float, noise: float, init: ReflectionSet,
                         tol: float = 1e-4, max_outer: int = 30, sca_tol: float = 1e-6,
                         sca_max_iter: int = 100) -> AOResult:
    """Alternate water-filling and SCA on the relaxed problem.

    Each outer iteration runs water-filling for the current reflections and
    then SCA for the new powers; the recorded value is the relaxed objective
    (bits) after both steps.  Stops on relative improvement below ``tol``.
    """
    refl = init.copy()
    trace, sca_its = [], []
    converged = False
    power = None
    for _ in range(max_outer):
        new_power = waterfill(gains_of(ch, refl.Phi), P, noise)
        sca = sca_reflection(ch, new_power.p, noise, refl, tol=sca_tol, max_iter=sca_max_iter)
        sca_its.append(sca.iterations)
        obj = true_objective(ch, new_power.p, noise, sca.reflections.Phi)
        if trace and obj < trace[-1]:
            # round-off at a fixed point; keep the incumbent so the trace stays monotone
            converged = True
            break
        refl, power = sca.reflections, new_power
        trace.append(obj)
        prev = trace[-2] if len(trace) >= 2 else 0.0
        if obj == 0 or (len(trace) >= 2 and obj - prev <= tol * abs(obj)):
            converged = True
            break
    # powers matched to the final reflections
    final = waterfill(gains_of(ch, refl.Phi), P, noise)
    final_obj = true_objective(ch, final.p, noise, refl.Phi)
    if final_obj >= trace[-1]:
        power, objective = final, final_obj
    else:
        objective = trace[-1]
    return AOResult(refl, power, trace, sca_its, converged, objective)


def target_capacitances(Phi: np.ndarray, params: CircuitParams, freqs) -> tuple[np.ndarray, list]:
    """Per-subcarrier complex capacitance targets from relaxed reflections.

    A reflection with an eigenvalue at -1 is scaled by ``1 - 1e-6`` and retried once.
    """
    notes = []
    out = []
    for n, (P_n, f) in enumerate(zip(Phi, freqs)):
        try:
            A = admittance_from_reflection(P_n, params.a0)
        except DegenerateReflectionError:
            notes.append(f"carrier {n}: I + Phi singular, scaled Phi by 1-1e-6")
            A = admittance_from_reflection(P_n * (1 - 1e-6), params.a0)
        out.append(capacitance_from_admittance(A, params, f, open_as_zero=True))
    return np.stack(out), notes


def realize(ch: FrequencyChannels, C: np.ndarray, params: CircuitParams, freqs, P: float,
            noise: float):
    """Circuit reflections of ``C`` across the band, water-filled; returns (Phi, power, bits)."""
    Phi = circuit_reflections(C, params, freqs)
    g = gains_of(ch, Phi)
    power = waterfill(g, P, noise)
    bits = float(np.sum(np.log2(1 + power.p * g / noise)))
    return Phi, power, bits


def solve_end_to_end(ch: FrequencyChannels, P: float, noise: float, params: CircuitParams, freqs,
                     *, structure: str = "full", init: str = "closed_form", Q: int = 50,
                     rng: np.random.Generator | None = None, tol: float = 1e-4,
                     max_outer: int = 30, skip_ao: bool = False, symmetric_C: bool = False) -> SolveReport:
    """Relaxed optimization followed by capacitance projection and circuit re-evaluation."""
    freqs = np.asarray(freqs, dtype=float)
    if freqs.shape[0] != ch.N:
        raise ValueError("one frequency per subcarrier is required")
    iterations = {}
    if init == "sdr":
        sdr = init_reflection_sdr(ch, Q=Q, rng=rng)
        refl0 = sdr.reflections
        iterations["sdr_rank_one"] = sum(c.rank_one for c in sdr.carriers)
    elif init == "closed_form":
        refl0 = init_reflection_closed_form(ch)
    else:
        raise ValueError(f"unknown init {init!r}")
    if structure != "full":
        refl0 = _restructure(ch, refl0, structure)

    if skip_ao:
        power = waterfill(gains_of(ch, refl0.Phi), P, noise)
        refl = refl0
        trace = [true_objective(ch, power.p, noise, refl.Phi)]
    else:
        ao = alternating_optimize(ch, P, noise, refl0, tol=tol, max_outer=max_outer)
        refl, power, trace = ao.reflections, ao.power, ao.trace
        iterations["ao"] = len(ao.trace)
        iterations["sca"] = ao.sca_iterations
    relaxed = ao.objective if not skip_ao else trace[-1]

    targets, notes = target_capacitances(refl.Phi, params, freqs)
    proj = project_capacitance(targets, symmetric=symmetric_C)
    iterations["projection"] = proj.iterations
    Phi_c, power_c, bits = realize(ch, proj.C, params, freqs, P, noise)
    return SolveReport(trace, relaxed, proj.C, bits, power_c, iterations, refl, Phi_c, notes)


def _restructure(ch: FrequencyChannels, refl: ReflectionSet, structure: str) -> ReflectionSet:
    """Feasible starting point of the requested structure, derived from a full initializer."""
    from .reflection import SurrogatePoint, surrogate_subproblem
    if structure == "common":
        # start from the best single matrix among the per-carrier initial points
        gains = [np.sum(gains_of(ch, np.broadcast_to(P_n, refl.Phi.shape))) for P_n in refl.Phi]
        best = refl.Phi[int(np.argmax(gains))]
        return ReflectionSet(np.repeat(best[None], ch.N, axis=0), "common")
    # align the structured reflection with the channel phases of the full initializer
    point = SurrogatePoint.from_reflections(ch, refl)
    return surrogate_subproblem(point, ch, np.ones(ch.N), 1.0, structure)
