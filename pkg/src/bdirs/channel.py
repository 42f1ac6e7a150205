"""Frequency-selective channels for the direct, Tx-IRS and IRS-Rx links.

Time-domain taps follow an exponential power delay profile; per-subcarrier
responses are the N-point DFT of the taps.  Shapes used throughout:

* ``d``: ``(N,)`` direct channel per subcarrier
* ``g``: ``(N, M)`` transmitter-to-IRS vector per subcarrier
* ``s``: ``(N, M)`` vector whose Hermitian ``s[n].conj() @ ...`` is the
  IRS-to-receiver row per subcarrier
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelConfig:
    M: int = 4
    N: int = 64
    N_CP: int = 16
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

    @property
    def L_max(self) -> int:
        return max(self.L_D, self.L_G + self.L_S - 1)

    def validate(self) -> None:
        for name in ("M", "N", "L_D", "L_G", "L_S"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("d_D", "d_G", "d_S"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.N_CP < self.L_max:
            raise ValueError(f"N_CP={self.N_CP} is shorter than the maximum delay spread L_max={self.L_max}")
        if self.N < max(self.L_D, self.L_G, self.L_S):
            raise ValueError(f"N={self.N} is smaller than a tap count")


@dataclass
class TimeDomainChannels:
    d_taps: np.ndarray  # (L_D,)
    g_taps: np.ndarray  # (L_G, M)
    s_taps: np.ndarray  # (L_S, M)


@dataclass
class FrequencyChannels:
    d: np.ndarray  # (N,)
    g: np.ndarray  # (N, M)
    s: np.ndarray  # (N, M)

    @property
    def N(self) -> int:
        return self.d.shape[0]

    @property
    def M(self) -> int:
        return self.g.shape[1]

    def subset(self, idx) -> "FrequencyChannels":
        return FrequencyChannels(self.d[idx], self.g[idx], self.s[idx])


def path_power(beta0_dB: float, d: float, eps: float) -> float:
    if d <= 0:
        raise ValueError("distance must be positive")
    return 10 ** (beta0_dB / 10) * d ** (-eps)


def tap_variances(beta: float, L: int) -> np.ndarray:
    """Exponential power delay profile normalised to total power ``beta``."""
    if L == 1:
        return np.array([beta])
    w = np.exp(-np.arange(L) / (L - 1))
    return beta * w / w.sum()


def _cn(rng: np.random.Generator, var: np.ndarray, shape) -> np.ndarray:
    std = np.sqrt(var / 2)
    return std * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def generate_taps(cfg: ChannelConfig, rng: np.random.Generator) -> TimeDomainChannels:
    """Draw one realization of the three tap sets.

    Draw order is fixed (direct, Tx-IRS, IRS-Rx) so a given generator state
    always yields the same taps.
    """
    vd = tap_variances(path_power(cfg.beta0_dB, cfg.d_D, cfg.eps_D), cfg.L_D)
    vg = tap_variances(path_power(cfg.beta0_dB, cfg.d_G, cfg.eps_G), cfg.L_G)
    vs = tap_variances(path_power(cfg.beta0_dB, cfg.d_S, cfg.eps_S), cfg.L_S)
    d = _cn(rng, vd, (cfg.L_D,))
    g = _cn(rng, vg[:, None], (cfg.L_G, cfg.M))
    s = _cn(rng, vs[:, None], (cfg.L_S, cfg.M))
    return TimeDomainChannels(d, g, s)


def to_frequency_domain(taps: TimeDomainChannels, N: int) -> FrequencyChannels:
    L = max(taps.d_taps.shape[0], taps.g_taps.shape[0], taps.s_taps.shape[0])
    if N < L:
        raise ValueError(f"N={N} is smaller than the tap count {L}")
    d = np.fft.fft(taps.d_taps, n=N)
    g = np.fft.fft(taps.g_taps, n=N, axis=0)
    # the DFT acts on the Hermitian row s^H, so s itself is conj(DFT(conj(taps)))
    s = np.fft.fft(taps.s_taps.conj(), n=N, axis=0).conj()
    return FrequencyChannels(d, g, s)


def effective_channel(d, s, g, Phi):
    """``h = d + s^H Phi g``; broadcasts over a leading subcarrier axis."""
    s = np.asarray(s)
    g = np.asarray(g)
    Phi = np.asarray(Phi)
    if Phi.shape[-2:] != (s.shape[-1], g.shape[-1]):
        raise ValueError(f"dimension mismatch: Phi {Phi.shape}, s {s.shape}, g {g.shape}")
    return d + np.einsum("...m,...mk,...k->...", s.conj(), Phi, g)


def effective_channels(ch: FrequencyChannels, Phi: np.ndarray) -> np.ndarray:
    return effective_channel(ch.d, ch.s, ch.g, Phi)


def achievable_rate(h, p, gamma: float, sigma2: float, N_CP: int) -> tuple[float, float]:
    """Return ``(sum_rate_bits, rate_bps_per_Hz)`` for gains ``h`` and powers ``p``."""
    h = np.asarray(h)
    p = np.asarray(p, dtype=float)
    snr = p * np.abs(h) ** 2 / (gamma * sigma2)
    total = float(np.sum(np.log2(1 + snr)))
    return total, total / (h.shape[0] + N_CP)


def dbm_to_watt(dbm: float) -> float:
    return 10 ** ((dbm - 30) / 10)


def noise_power_dbm(psd_dbm_hz: float, nf_db: float, spacing_hz: float) -> float:
    return psd_dbm_hz + nf_db + 10 * np.log10(spacing_hz)
