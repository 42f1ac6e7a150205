"""Experiment configuration and the seeded Monte-Carlo harness.

Every realization draws its channels from its own seed stream,
``SeedSequence(master_seed, spawn_key=(index, 0))``, so results do not depend
on execution order or on how many worker processes are used.  Aggregates
are always summed in realization-index order.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .channel import (ChannelConfig, dbm_to_watt, generate_taps, noise_power_dbm,
                      to_frequency_domain)
from .circuit import CircuitError, CircuitParams, subcarrier_frequencies
from .optim.init import init_reflection_closed_form, init_reflection_sdr
from .optim.pipeline import alternating_optimize
from .schemes import ALL_SCHEMES, reported_rate, run_scheme

log = logging.getLogger(__name__)

# subcarrier spacing of the reference setup (300 MHz / 64); noise bandwidth when B = 0
REFERENCE_SPACING_HZ = 300e6 / 64


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    # system
    f_c: float = 2.4e9
    B: float = 300e6
    N: int = 64
    M: int = 10
    N_CP: int = 16
    # channel
    L_D: int = 16
    L_G: int = 9
    L_S: int = 8
    d_D: float = 33.0
    d_G: float = 30.0
    d_S: float = 5.0
    eps_D: float = 3.5
    eps_G: float = 2.2
    eps_S: float = 2.8
    beta0_dB: float = -30.0
    # receiver
    gamma_dB: float = 8.8
    noise_psd_dBm_Hz: float = -169.0
    noise_figure_dB: float = 9.0
    noise_power_dBm: float | None = None
    # circuit
    R: float = 1.0
    L1: float = 2.5e-9
    L2: float = 0.7e-9
    a0: float = 0.02
    # experiment
    P_dBm: float = 45.0
    P_dBm_list: list = field(default_factory=lambda: [20.0, 25.0, 30.0, 35.0, 40.0, 45.0])
    M_list: list = field(default_factory=lambda: [2, 4, 6, 8, 10])
    realizations: int = 100
    master_seed: int = 0
    schemes: list = field(default_factory=lambda: list(ALL_SCHEMES))
    init: str = "closed_form"
    Q: int = 50
    ao_tol: float = 1e-4
    max_outer: int = 30
    asymmetric_probe: bool = False

    # -- derived -------------------------------------------------------
    def channel_config(self, M: int | None = None) -> ChannelConfig:
        return ChannelConfig(M=self.M if M is None else M, N=self.N, N_CP=self.N_CP,
                             L_D=self.L_D, L_G=self.L_G, L_S=self.L_S,
                             d_D=self.d_D, d_G=self.d_G, d_S=self.d_S,
                             eps_D=self.eps_D, eps_G=self.eps_G, eps_S=self.eps_S,
                             beta0_dB=self.beta0_dB)

    def circuit_params(self) -> CircuitParams:
        return CircuitParams(R=self.R, L1=self.L1, L2=self.L2, a0=self.a0)

    @property
    def sigma2_dBm(self) -> float:
        if self.noise_power_dBm is not None:
            return self.noise_power_dBm
        spacing = self.B / self.N if self.B > 0 else REFERENCE_SPACING_HZ
        return noise_power_dbm(self.noise_psd_dBm_Hz, self.noise_figure_dB, spacing)

    @property
    def effective_noise(self) -> float:
        """``Gamma * sigma^2`` in watts."""
        return 10 ** (self.gamma_dB / 10) * dbm_to_watt(self.sigma2_dBm)

    def frequencies(self) -> np.ndarray:
        return subcarrier_frequencies(self.f_c, self.B, self.N)

    def validate(self) -> "ExperimentConfig":
        try:
            self.channel_config().validate()
            for M in self.M_list:
                if int(M) < 1:
                    raise ValueError(f"M_list entries must be >= 1, got {M}")
            self.circuit_params()
            self.frequencies()
        except (ValueError, CircuitError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.gamma_dB < 0:
            raise ConfigError("gamma_dB must be >= 0 (gap Gamma >= 1)")
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if self.Q < 1:
            raise ConfigError("Q must be >= 1")
        if self.init not in ("closed_form", "sdr"):
            raise ConfigError(f"init must be 'closed_form' or 'sdr', got {self.init!r}")
        unknown = [s for s in self.schemes if s not in ALL_SCHEMES]
        if unknown:
            raise ConfigError(f"unknown schemes {unknown}; choose from {list(ALL_SCHEMES)}")
        if not self.P_dBm_list or not self.M_list:
            raise ConfigError("P_dBm_list and M_list must be nonempty")
        return self


DESK_SCALE = {"M": 4, "N": 16, "realizations": 20, "M_list": [1, 2, 4]}


def load_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    """Read a JSON config; missing keys take the reference-setup defaults."""
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    data.update(overrides or {})
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    return ExperimentConfig(**data).validate()


def config_to_json(cfg: ExperimentConfig) -> str:
    return json.dumps(asdict(cfg), indent=2, sort_keys=True)


# -- realizations --------------------------------------------------------

def realization_rng(master_seed: int, index: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index, stream)))


def draw_channels(cfg: ExperimentConfig, index: int, M: int | None = None):
    ccfg = cfg.channel_config(M)
    return to_frequency_domain(generate_taps(ccfg, realization_rng(cfg.master_seed, index)), cfg.N)


def _run_one(args):
    cfg, index, M, P_dBm = args
    try:
        ch = draw_channels(cfg, index, M)
        out = {}
        for scheme in cfg.schemes:
            rep = run_scheme(scheme, ch, dbm_to_watt(P_dBm), cfg.effective_noise, cfg.circuit_params(),
                             cfg.frequencies(), f_c=cfg.f_c, init=cfg.init, Q=cfg.Q,
                             rng=realization_rng(cfg.master_seed, index, 1),
                             tol=cfg.ao_tol, max_outer=cfg.max_outer)
            out[scheme] = reported_rate(rep) / (cfg.N + cfg.N_CP)
        return out, None
    except Exception as exc:  # reported as a failure count, run continues
        log.warning("realization %d (M=%s, P=%s dBm) failed: %s", index, M, P_dBm, exc)
        return None, repr(exc)


def _map(fn, tasks, workers: int):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=1))


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


@dataclass
class SweepResult:
    axis: str
    rows: list          # (axis_value, scheme, mean, std, n, failures)
    details: list       # (axis_value, realization, scheme, rate)

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([self.axis, "scheme", "mean_rate_bps_per_hz", "std_rate_bps_per_hz", "realizations", "failures"])
        for v, scheme, mean, std, n, fails in self.rows:
            w.writerow([fmt(v), scheme, fmt(mean), fmt(std), n, fails])
        return buf.getvalue()

    def details_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([self.axis, "realization", "scheme", "rate_bps_per_hz"])
        for v, idx, scheme, rate in self.details:
            w.writerow([fmt(v), idx, scheme, fmt(rate)])
        return buf.getvalue()


def run_sweep(cfg: ExperimentConfig, axis: str, workers: int = 1) -> SweepResult:
    """Monte-Carlo sweep over transmit power (``axis='power'``) or element count (``'elements'``)."""
    if axis == "power":
        name, values = "P_dBm", [float(v) for v in cfg.P_dBm_list]
        tasks = [(cfg, i, cfg.M, v) for v in values for i in range(cfg.realizations)]
    elif axis == "elements":
        name, values = "M", [int(v) for v in cfg.M_list]
        tasks = [(cfg, i, v, cfg.P_dBm) for v in values for i in range(cfg.realizations)]
    else:
        raise ValueError(f"axis must be 'power' or 'elements', got {axis!r}")
    if not values:
        raise ValueError("sweep axis is empty")
    results = _map(_run_one, tasks, workers)
    rows, details = [], []
    k = 0
    for v in values:
        per_scheme = {s: [] for s in cfg.schemes}
        failures = 0
        for i in range(cfg.realizations):
            out, err = results[k]
            k += 1
            if out is None:
                failures += 1
                continue
            for s in cfg.schemes:
                per_scheme[s].append(out[s])
                details.append((v, i, s, out[s]))
        for s in cfg.schemes:
            r = np.array(per_scheme[s])
            mean = float(r.sum() / r.size) if r.size else float("nan")
            std = float(r.std(ddof=1)) if r.size > 1 else 0.0
            rows.append((v, s, mean, std, int(r.size), failures))
    return SweepResult(name, rows, details)


@dataclass
class ConvergenceResult:
    trace: list          # relaxed objective in bits per OFDM symbol
    rates: list          # normalized rate, bps/Hz
    converged: bool

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "objective_bits", "rate_bps_per_hz", "converged"])
        for i, (obj, rate) in enumerate(zip(self.trace, self.rates), start=1):
            w.writerow([i, fmt(obj), fmt(rate), int(self.converged)])
        return buf.getvalue()


def run_convergence(cfg: ExperimentConfig, index: int = 0) -> ConvergenceResult:
    """Relaxed-objective trace of the alternating optimization for one realization."""
    ch = draw_channels(cfg, index)
    if cfg.init == "sdr":
        init = init_reflection_sdr(ch, Q=cfg.Q, rng=realization_rng(cfg.master_seed, index, 1)).reflections
    else:
        init = init_reflection_closed_form(ch)
    ao = alternating_optimize(ch, dbm_to_watt(cfg.P_dBm), cfg.effective_noise, init,
                              tol=cfg.ao_tol, max_outer=cfg.max_outer)
    denom = cfg.N + cfg.N_CP
    return ConvergenceResult(list(ao.trace), [t / denom for t in ao.trace], ao.converged)


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None}).validate()
