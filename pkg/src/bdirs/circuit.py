"""Lumped-circuit frequency response of a fully-connected BD-IRS.

Every pair of elements (and every element to ground) is joined by the same
branch: a resistor R in series with an inductor L2 and a tunable capacitor,
with a second inductor L1 in parallel.  The capacitance matrix ``C`` sets all
branches; the admittance matrix ``A`` and the reflection matrix ``Phi`` follow
at each frequency.

Conventions: ``C[m, m]`` is the element-to-ground capacitance, ``C[m, k]`` the
element-m-to-element-k capacitance.  Arrays are plain ``numpy`` arrays; the
functions accept a single ``(M, M)`` matrix.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_A0 = 0.02
DEFAULT_COND_CAP = 1e12


class CircuitError(ValueError):
    """Raised for non-physical or numerically degenerate circuit inputs."""


class DegenerateReflectionError(CircuitError):
    """``I + Phi`` is singular: some eigenvalue of Phi sits at -1."""


class OpenBranchError(CircuitError):
    """Branch admittances that equal the bare L1 path, so no capacitance maps to them."""

    def __init__(self, entries: list[tuple[int, int]]):
        self.entries = entries
        super().__init__(f"capacitance undefined (open-circuit limit) at entries {entries}")


@dataclass(frozen=True)
class CircuitParams:
    R: float = 1.0
    L1: float = 2.5e-9
    L2: float = 0.7e-9
    a0: float = DEFAULT_A0

    def __post_init__(self):
        for name in ("R", "L1", "L2", "a0"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise CircuitError(f"{name} must be positive and finite, got {value!r}")


def subcarrier_frequencies(f_c: float, B: float, N: int) -> np.ndarray:
    """Centre frequency of each OFDM subcarrier, ``f_c + (B/N)(n - (N+1)/2)``."""
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    if B < 0:
        raise ValueError(f"bandwidth must be nonnegative, got {B!r}")
    n = np.arange(1, N + 1)
    freqs = f_c + (B / N) * (n - (N + 1) / 2)
    if freqs[0] <= 0:
        raise ValueError(f"lowest subcarrier frequency {freqs[0]!r} is not positive")
    return freqs


def branch_admittance(c, params: CircuitParams, f: float):
    """Admittance of one tunable branch.

    Works elementwise on arrays.  The series R-L2-C path is written as
    ``jwc / (1 + jwc (R + jwL2))`` so that ``c = 0`` gives the open-circuit
    limit 0 without a division by zero.
    """
    if f <= 0:
        raise ValueError(f"frequency must be positive, got {f!r}")
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise ValueError("capacitances must be nonnegative")
    w = 2 * np.pi * f
    jwc = 1j * w * c
    series = jwc / (1 + jwc * (params.R + 1j * w * params.L2))
    y = series + 1 / (1j * w * params.L1)
    return y[()] if y.ndim == 0 else y


def admittance_from_capacitance(C: np.ndarray, params: CircuitParams, f: float) -> np.ndarray:
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise CircuitError(f"capacitance matrix must be square, got shape {C.shape}")
    Y = branch_admittance(C, params, f)
    Y = np.atleast_2d(Y)
    A = -Y
    np.fill_diagonal(A, Y.sum(axis=1))
    if not np.all(np.isfinite(A)):
        raise CircuitError("admittance matrix has non-finite entries")
    return A


def _checked_solve(X: np.ndarray, Y: np.ndarray, cond_cap: float, what: str, exc=CircuitError):
    cond = np.linalg.cond(X)
    if not np.isfinite(cond) or cond > cond_cap:
        raise exc(f"{what} is ill-conditioned (cond={cond:.3g} > {cond_cap:.3g})")
    return np.linalg.solve(X, Y)


def reflection_from_admittance(A: np.ndarray, a0: float = DEFAULT_A0,
                               cond_cap: float = DEFAULT_COND_CAP) -> np.ndarray:
    """``Phi = (a0 I + A)^-1 (a0 I - A)``."""
    if a0 <= 0:
        raise CircuitError(f"a0 must be positive, got {a0!r}")
    A = np.asarray(A, dtype=complex)
    eye = np.eye(A.shape[0])
    return _checked_solve(a0 * eye + A, a0 * eye - A, cond_cap, "a0*I + A")


def admittance_from_reflection(Phi: np.ndarray, a0: float = DEFAULT_A0,
                               cond_cap: float = DEFAULT_COND_CAP) -> np.ndarray:
    """``A = a0 (I - Phi)(I + Phi)^-1``.

    Raises DegenerateReflectionError when ``I + Phi`` is (numerically) singular.
    """
    if a0 <= 0:
        raise CircuitError(f"a0 must be positive, got {a0!r}")
    Phi = np.asarray(Phi, dtype=complex)
    eye = np.eye(Phi.shape[0])
    # right division X (I+Phi)^-1 == solve((I+Phi)^T, X^T)^T
    At = _checked_solve((eye + Phi).T, (a0 * (eye - Phi)).T, cond_cap, "I + Phi",
                        exc=DegenerateReflectionError)
    return At.T


def capacitance_from_admittance(A: np.ndarray, params: CircuitParams, f: float, *,
                                open_as_zero: bool = False) -> np.ndarray:
    """Per-entry capacitance that would produce admittance ``A`` at frequency ``f``.

    The diagonal uses the row sum of ``A`` (the grounding branch), the
    off-diagonal entries ``-A[m, k]``.  The output is complex in general.

    Entries whose aggregate equals ``1/(jwL1)`` exactly have no capacitance;
    they raise OpenBranchError unless ``open_as_zero`` is set, in which case
    they are set to 0 F (the open-circuit limit) and logged.
    """
    if f <= 0:
        raise ValueError(f"frequency must be positive, got {f!r}")
    A = np.asarray(A, dtype=complex)
    w = 2 * np.pi * f
    Y = -A.copy()
    np.fill_diagonal(Y, A.sum(axis=1))
    series = Y - 1 / (1j * w * params.L1)
    open_mask = series == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        z = 1 / series - params.R - 1j * w * params.L2
        Ct = 1 / (1j * w * z)
    if open_mask.any():
        entries = [tuple(int(i) for i in ix) for ix in np.argwhere(open_mask)]
        if not open_as_zero:
            raise OpenBranchError(entries)
        log.warning("open-circuit branches substituted with 0 F at %s", entries)
        Ct[open_mask] = 0.0
    if not np.all(np.isfinite(Ct)):
        raise CircuitError("recovered capacitance has non-finite entries (shorted capacitor branch)")
    return Ct


def reflection_from_capacitance(C: np.ndarray, params: CircuitParams, f: float,
                                cond_cap: float = DEFAULT_COND_CAP) -> np.ndarray:
    return reflection_from_admittance(admittance_from_capacitance(C, params, f), params.a0, cond_cap)


def circuit_reflections(C: np.ndarray, params: CircuitParams, freqs) -> np.ndarray:
    """Stack of reflection matrices, shape ``(N, M, M)``, one per frequency."""
    return np.stack([reflection_from_capacitance(C, params, f) for f in freqs])


def spectral_norm(Phi: np.ndarray) -> float:
    return float(np.linalg.norm(Phi, 2))


def hermitian_part_min_eig(A: np.ndarray) -> float:
    return float(np.linalg.eigvalsh((A + A.conj().T) / 2).min())
