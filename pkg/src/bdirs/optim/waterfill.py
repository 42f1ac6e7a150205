"""Water-filling power allocation over parallel subcarriers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class PowerAllocation:
    p: np.ndarray
    water_level: float
    degenerate: bool = False  # all gains zero with P > 0

    @property
    def active(self) -> np.ndarray:
        return self.p > 0


def waterfill(gains, P: float, noise: float) -> PowerAllocation:
    """Allocate total power ``P`` over channels with power gains ``gains``.

    ``noise`` is the effective noise ``Gamma * sigma^2``.  The water level is
    found exactly: floors ``noise / gain`` are sorted and the largest active
    set whose level stays above its highest floor is kept.
    """
    gains = np.asarray(gains, dtype=float)
    if gains.ndim != 1 or gains.size == 0:
        raise ValueError("gains must be a nonempty 1-D array")
    if not (np.isfinite(P) and P >= 0):
        raise ValueError("total power must be finite and nonnegative")
    if not (np.isfinite(noise) and noise > 0):
        raise ValueError("noise must be finite and positive")
    if not np.all(np.isfinite(gains)) or np.any(gains < 0):
        raise ValueError("gains must be finite and nonnegative")
    p = np.zeros_like(gains)
    usable = gains > 0
    if not usable.any():
        return PowerAllocation(p, 0.0, degenerate=P > 0)

    floors = np.full_like(gains, np.inf)
    floors[usable] = noise / gains[usable]
    order = np.argsort(floors, kind="stable")
    sorted_floors = floors[order]
    if P == 0:
        return PowerAllocation(p, float(sorted_floors[0]))

    cums = np.cumsum(sorted_floors[: usable.sum()])
    k_all = np.arange(1, cums.size + 1)
    levels = (P + cums) / k_all
    # level with k carriers must exceed the k-th floor; take the largest such k
    ok = levels > sorted_floors[: cums.size]
    k = int(np.nonzero(ok)[0][-1]) + 1
    mu = float(levels[k - 1])
    active = order[:k]
    p[active] = mu - floors[active]
    np.maximum(p, 0.0, out=p)
    return PowerAllocation(p, mu)


def rate_bits(gains, p, noise: float) -> float:
    """Sum of ``log2(1 + p * gain / noise)`` over subcarriers."""
    return float(np.sum(np.log2(1 + np.asarray(p) * np.asarray(gains) / noise)))
