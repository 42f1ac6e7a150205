"""Initial reflections that maximize total effective channel power.

``init_reflection_closed_form`` solves the per-carrier channel-power problem
exactly (``|d + s^H Phi g| <= |d| + ||s|| ||g||`` with equality for an aligned
rank-one ``Phi``).  ``init_reflection_sdr`` follows the lifted
semidefinite-relaxation route: vectorize ``Phi``, lift ``w = [q; t]`` to
``W = w w^H``, solve the SDP, then recover ``q`` by eigen-decomposition when
the solution is rank one, or by Gaussian randomization otherwise.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..channel import FrequencyChannels, effective_channels
from .reflection import ReflectionSet, align_full, project_spectral_ball
from .sdp import solve_sdp

log = logging.getLogger(__name__)


def init_reflection_closed_form(ch: FrequencyChannels) -> ReflectionSet:
    Phi = np.stack([align_full(ch.s[n], ch.g[n], ch.d[n]) for n in range(ch.N)])
    return ReflectionSet(Phi, "full")


def vec(Phi: np.ndarray) -> np.ndarray:
    """Column-major vectorization."""
    return Phi.reshape(-1, order="F") if Phi.ndim == 2 else Phi.transpose(0, 2, 1).reshape(Phi.shape[0], -1)


def unvec(q: np.ndarray, M: int) -> np.ndarray:
    return q.reshape(M, M, order="F")


def cascade_vector(s: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``t`` with ``t^H = g^T kron s^H``, so that ``s^H Phi g = t^H vec(Phi)``."""
    return np.kron(g.conj(), s)


def column_sum_form(M: int) -> np.ndarray:
    """``I_M kron 1_M``: ``q^H (I kron 1) q`` is the sum over columns of ``|column sum|^2``."""
    return np.kron(np.eye(M), np.ones((M, M)))


def column_sum_quadratic(Phi: np.ndarray) -> float:
    q = vec(Phi)
    M = Phi.shape[0]
    return float(np.real(q.conj() @ column_sum_form(M) @ q))


@dataclass
class SDRCarrier:
    value: float            # SDP optimum for this carrier, |d|^2 + <W, M_n>
    dual_bound: float
    rank_one: bool
    eig_ratio: float
    converged: bool
    used_closed_form: bool = False


@dataclass
class SDRReport:
    reflections: ReflectionSet
    carriers: list = field(default_factory=list)

    @property
    def sdr_value(self) -> float:
        return float(sum(c.value for c in self.carriers))


def _sdp_data(d: complex, t: np.ndarray, M: int):
    M2 = M * M
    n = 2 * M2
    Mn = np.zeros((n, n), complex)
    Mn[:M2, :M2] = np.outer(t, t.conj())
    Mn[:M2, M2:] = d * np.eye(M2)
    Mn[M2:, :M2] = np.conj(d) * np.eye(M2)
    D = np.zeros((n, n))
    D[:M2, :M2] = column_sum_form(M)
    # tr(W11) <= M: implied by Phi Phi^H <= I (||Phi||_F^2 <= M) and keeps the relaxation bounded
    E = np.zeros((n, n))
    E[:M2, :M2] = np.eye(M2)
    A, b = [], []
    for i in range(M2):
        Ai = np.zeros((n, n))
        Ai[M2 + i, M2 + i] = 1.0
        A.append(Ai)
        b.append(abs(t[i]) ** 2)
    identity = (np.ones(M2), np.array([0.0, 1.0]))
    return Mn, A, b, [D, E], [float(M), float(M)], identity


def _fix_phase(w: np.ndarray, t: np.ndarray, M2: int) -> np.ndarray:
    """Rotate ``w`` so its lower block best matches ``t``; return the ``q`` block."""
    inner = np.vdot(w[M2:], t)
    if abs(inner) > 0:
        w = w * (inner / abs(inner))
    return w[:M2]


def _gain(d, s, g, Phi):
    return abs(d + s.conj() @ Phi @ g)


def init_reflection_sdr(ch: FrequencyChannels, Q: int = 50, rng: np.random.Generator | None = None,
                        *, rank_tol: float = 1e-6, sdp_tol: float = 1e-6,
                        max_iter: int = 50_000) -> SDRReport:
    """SDR initializer with EVD extraction / Gaussian randomization and keep-the-better repair."""
    if Q < 1:
        raise ValueError("Q must be >= 1")
    rng = np.random.default_rng() if rng is None else rng
    M = ch.M
    M2 = M * M
    closed = init_reflection_closed_form(ch)
    out = np.empty_like(closed.Phi)
    carriers = []
    for n in range(ch.N):
        d, s, g = ch.d[n], ch.s[n], ch.g[n]
        t = cascade_vector(s, g)
        kappa = abs(d) + np.linalg.norm(t)
        if kappa == 0:
            out[n] = closed.Phi[n]
            carriers.append(SDRCarrier(0.0, 0.0, True, 0.0, True, True))
            continue
        # solve on unit-scaled data; objective scales by kappa^2
        dn, tn = d / kappa, t / kappa
        Mn, A, b, G, h, ident = _sdp_data(dn, tn, M)
        try:
            res = solve_sdp(Mn, A, b, G, h, identity_combo=ident, tol=sdp_tol, max_iter=max_iter)
        except (np.linalg.LinAlgError, RuntimeError) as exc:
            log.warning("SDP failed on carrier %d (%s); using closed form", n, exc)
            out[n] = closed.Phi[n]
            carriers.append(SDRCarrier(np.nan, np.nan, False, np.nan, False, True))
            continue
        if not res.converged:
            log.warning("SDP on carrier %d stopped at gap %.2e after %d iterations", n, res.gap, res.iterations)
        W = res.W
        vals, vecs = np.linalg.eigh(W)
        ratio = float(vals[-2] / vals[-1]) if vals[-1] > 0 else 0.0
        rank_one = ratio <= rank_tol
        log.debug("carrier %d: eig ratio %.3e (%s)", n, ratio, "EVD" if rank_one else "randomization")
        if rank_one:
            v11, V11 = np.linalg.eigh(W[:M2, :M2])
            q = V11[:, -1] * np.sqrt(max(v11[-1], 0.0))
            # W21 = t q^H for a rank-one solution; align the phase of q with it
            inner = tn.conj() @ W[M2:, :M2] @ q
            if abs(inner) > 0:
                q = q * np.conj(inner) / abs(inner)
            Phi = project_spectral_ball(unvec(q, M))
        else:
            root = vecs * np.sqrt(np.maximum(vals, 0))
            best, best_gain = None, -np.inf
            for _ in range(Q):
                z = (rng.standard_normal(W.shape[0]) + 1j * rng.standard_normal(W.shape[0])) / np.sqrt(2)
                cand = project_spectral_ball(unvec(_fix_phase(root @ z, tn, M2), M))
                gain = _gain(d, s, g, cand)
                if gain > best_gain:
                    best, best_gain = cand, gain
            Phi = best
        used_closed = _gain(d, s, g, closed.Phi[n]) > _gain(d, s, g, Phi)
        out[n] = closed.Phi[n] if used_closed else Phi
        value = (abs(dn) ** 2 + res.primal) * kappa ** 2
        bound = (abs(dn) ** 2 + res.dual_bound) * kappa ** 2
        carriers.append(SDRCarrier(value, bound, rank_one, ratio, res.converged, used_closed))
    return SDRReport(ReflectionSet(out, "full"), carriers)


def channel_power(ch: FrequencyChannels, refl: ReflectionSet) -> np.ndarray:
    return np.abs(effective_channels(ch, refl.Phi)) ** 2
