"""Release self-check: invariant suites of every module at small sizes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (ChannelConfig, FrequencyChannels, effective_channels, generate_taps,
                      to_frequency_domain)
from .circuit import (admittance_from_capacitance, admittance_from_reflection,
                      capacitance_from_admittance, hermitian_part_min_eig, reflection_from_admittance,
                      subcarrier_frequencies)
from .experiment import ExperimentConfig
from .optim.init import column_sum_quadratic, init_reflection_closed_form, init_reflection_sdr
from .optim.pipeline import alternating_optimize, gains_of
from .optim.projection import objective_gradient, project_capacitance
from .optim.reflection import (STRUCTURES, ReflectionSet, SurrogatePoint, project_spectral_ball,
                               surrogate_subproblem)
from .optim.waterfill import waterfill

SIZES_M = (1, 2, 3, 5)
SIZES_N = (1, 4, 16)


@dataclass
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool
    report_only: bool = False


def _cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _rand_channels(rng, M, N):
    return FrequencyChannels(_cn(rng, N), _cn(rng, N, M), _cn(rng, N, M))


def _sym_caps(rng, M):
    C = np.exp(rng.uniform(np.log(0.1e-12), np.log(10e-12), (M, M)))
    return np.triu(C) + np.triu(C, 1).T


def _max_check(name, values, tol, upper=True):
    worst = float(np.max(values)) if upper else float(np.min(values))
    ok = worst <= tol if upper else worst >= tol
    return Check(name, worst, tol, bool(ok))


def run_selfcheck(cfg: ExperimentConfig, seed: int = 12345) -> list[Check]:
    rng = np.random.default_rng(seed)
    params = cfg.circuit_params()
    band = np.linspace(cfg.f_c - cfg.B / 2, cfg.f_c + cfg.B / 2, 8) if cfg.B > 0 else [cfg.f_c]
    checks = []

    # circuit model
    sv, rt_c, rt_phi, herm, asym = [], [], [], [], []
    for M in SIZES_M:
        for _ in range(20):
            C = _sym_caps(rng, M)
            for f in band:
                A = admittance_from_capacitance(C, params, f)
                sv.append(np.linalg.norm(reflection_from_admittance(A, params.a0), 2) - 1)
                herm.append(hermitian_part_min_eig(A))
                Ct = capacitance_from_admittance(A, params, f)
                rt_c.append(np.abs(Ct - C).max() / C.max())
            X = _cn(rng, M, M)
            Phi = 0.9 * X / np.linalg.norm(X, 2)
            back = reflection_from_admittance(admittance_from_reflection(Phi, params.a0), params.a0)
            rt_phi.append(np.linalg.norm(back - Phi) / np.linalg.norm(Phi))
            if cfg.asymmetric_probe and M > 1:
                Ca = np.exp(rng.uniform(np.log(0.1e-12), np.log(10e-12), (M, M)))
                try:
                    asym.append(np.linalg.norm(reflection_from_admittance(
                        admittance_from_capacitance(Ca, params, cfg.f_c), params.a0), 2))
                except ValueError:
                    asym.append(np.inf)
    checks.append(_max_check("passivity: sigma_max(Phi) - 1, symmetric C", sv, 1e-9))
    checks.append(_max_check("round trip C -> A -> C (relative)", rt_c, 1e-9))
    checks.append(_max_check("round trip Phi -> A -> Phi (relative)", rt_phi, 1e-9))
    checks.append(_max_check("Hermitian part of A: min eigenvalue", herm, -1e-12, upper=False))
    eye = np.eye(3)
    ident = max(np.abs(reflection_from_admittance(0 * eye, params.a0) - eye).max(),
                np.abs(reflection_from_admittance(params.a0 * eye, params.a0)).max())
    checks.append(Check("identity algebra A=0 -> I, A=a0 I -> 0", ident, 1e-15, ident <= 1e-15))
    if asym:
        a = np.asarray(asym)
        checks.append(Check(f"asymmetric C probe: max sigma_max over {a.size} draws "
                            f"({np.mean(a > 1 + 1e-9):.0%} exceed 1)", float(a.max()), 1.0, True,
                            report_only=True))

    # channel model
    ccfg = ChannelConfig(M=3, N=16, N_CP=16)
    pars = []
    for _ in range(20):
        taps = generate_taps(ccfg, rng)
        fd = to_frequency_domain(taps, ccfg.N)
        for t, fq in ((taps.d_taps, fd.d), (taps.g_taps, fd.g), (taps.s_taps, fd.s)):
            pars.append(abs(np.sum(np.abs(fq) ** 2) - ccfg.N * np.sum(np.abs(t) ** 2)) / np.sum(np.abs(fq) ** 2))
    checks.append(_max_check("Parseval consistency (relative)", pars, 1e-9))
    f = subcarrier_frequencies(cfg.f_c, cfg.B, cfg.N)
    sym = float(np.abs(f + f[::-1] - 2 * cfg.f_c).max() / cfg.f_c)
    checks.append(Check("subcarrier grid symmetric about f_c", sym, 1e-12, sym <= 1e-12))

    # water-filling
    kkt = []
    for _ in range(200):
        N = int(rng.integers(1, 17))
        g = rng.exponential(size=N)
        P = float(rng.uniform(0.01, 10))
        pa = waterfill(g, P, 1.0)
        level = pa.p + 1 / g
        act = pa.p > 0
        kkt.append(abs(pa.p.sum() - P) / P)
        kkt.append(np.max(np.abs(level[act] - pa.water_level)) / pa.water_level)
        if (~act).any():
            kkt.append(max(0.0, pa.water_level - (1 / g[~act]).min()) / pa.water_level)
    checks.append(_max_check("water-filling KKT (relative)", kkt, 1e-6))

    # SCA / AO
    mono, opt = [], []
    for M in SIZES_M:
        for N in SIZES_N:
            ch = _rand_channels(rng, M, N)
            init = init_reflection_closed_form(ch)
            ao = alternating_optimize(ch, 10.0, 1.0, init)
            mono.append(-np.min(np.diff(ao.trace), initial=0.0))
            bound = (np.abs(ch.d) + np.linalg.norm(ch.s, axis=1) * np.linalg.norm(ch.g, axis=1)) ** 2
            pw = waterfill(bound, 10.0, 1.0)
            ref = np.sum(np.log2(1 + pw.p * bound))
            opt.append(abs(ao.objective - ref) / ref)
    checks.append(_max_check("AO trace nondecreasing (max drop)", mono, 1e-12))
    checks.append(_max_check("AO attains per-carrier spectral bound (relative)", opt, 1e-6))

    # structures honored, all feasible
    struct_err = []
    for structure in STRUCTURES:
        ch = _rand_channels(rng, 3, 4)
        refl = ReflectionSet(np.zeros((4, 3, 3)), structure)
        out = surrogate_subproblem(SurrogatePoint.from_reflections(ch, refl), ch, np.ones(4), 1.0,
                                   structure, refl.Phi)
        err = out.max_singular_value() - 1
        if structure == "diagonal":
            err = max(err, np.abs(out.Phi - np.einsum("nii->ni", out.Phi)[:, :, None] * np.eye(3)).max())
        if structure == "symmetric":
            err = max(err, np.abs(out.Phi - out.Phi.transpose(0, 2, 1)).max())
        if structure == "common":
            err = max(err, np.abs(out.Phi - out.Phi[:1]).max())
        struct_err.append(err)
    checks.append(_max_check("structure tags honored and passive", struct_err, 1e-9))

    # projection certificate
    cert = []
    for _ in range(10):
        T = _cn(rng, 8, 3, 3) + 1.0
        res = project_capacitance(T)
        Cn = res.C / np.abs(T).max()
        grad = objective_gradient(Cn, T / np.abs(T).max())
        pos = Cn > 1e-12
        cert.append(np.abs(grad[pos]).max(initial=0.0))
        cert.append(max(0.0, -grad[~pos].min(initial=0.0)))
    checks.append(_max_check("projection first-order certificate", cert, 1e-6))

    # vectorized constraint: forward direction
    prop2 = []
    for M in SIZES_M:
        for _ in range(50):
            Phi = project_spectral_ball(_cn(rng, M, M) * 2)
            prop2.append(column_sum_quadratic(Phi) - M)
    checks.append(_max_check("column-sum form <= M for passive Phi", prop2, 1e-9))

    # SDR keep-the-better
    dom = []
    for M in (1, 2):
        ch = _rand_channels(rng, M, 4)
        rep = init_reflection_sdr(ch, Q=10, rng=rng)
        base = gains_of(ch, init_reflection_closed_form(ch).Phi)
        dom.append(float(np.max(np.sqrt(base) - np.abs(effective_channels(ch, rep.reflections.Phi)))))
        dom.append(rep.reflections.max_singular_value() - 1)
    checks.append(_max_check("SDR initializer dominance and feasibility", dom, 1e-9))
    return checks


def format_table(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  {'measured':>12}  {'tolerance':>10}  result"]
    for c in checks:
        status = "REPORT" if c.report_only else ("PASS" if c.passed else "FAIL")
        lines.append(f"{c.name:<{width}}  {c.measured:>12.3e}  {c.tolerance:>10.1e}  {status}")
    return "\n".join(lines)
