"""Reflection sets and the SCA machinery for the reflection subproblem.

Given powers ``p``, the reflection subproblem maximizes
``sum_n log2(1 + p_n |h_n|^2 / noise)`` over passive reflections.  The convex
quadratic ``|h_n|^2`` is replaced by its tangent plane at the current
effective channel ``c_n``::

    |h|^2 >= 2 Re(conj(c) h) - |c|^2

which makes the surrogate concave.  For per-carrier structures the surrogate
decouples and each carrier maximizes ``Re(conj(c_n) s_n^H Phi_n g_n)`` over
the spectral unit ball, solved in closed form.  The frequency-common
structure couples carriers and is solved by projected gradient ascent.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..channel import FrequencyChannels, effective_channels

log = logging.getLogger(__name__)

STRUCTURES = ("full", "diagonal", "symmetric", "common")
_LN2 = np.log(2.0)


@dataclass
class ReflectionSet:
    Phi: np.ndarray  # (N, M, M)
    structure: str = "full"

    def __post_init__(self):
        if self.structure not in STRUCTURES:
            raise ValueError(f"unknown structure {self.structure!r}")
        self.Phi = np.asarray(self.Phi, dtype=complex)

    @property
    def N(self) -> int:
        return self.Phi.shape[0]

    def max_singular_value(self) -> float:
        return float(np.linalg.norm(self.Phi, ord=2, axis=(1, 2)).max())

    def copy(self) -> "ReflectionSet":
        return ReflectionSet(self.Phi.copy(), self.structure)


@dataclass
class SurrogatePoint:
    """Local point of the tangent-plane minorant: ``a + jb`` is the current effective channel."""
    a: np.ndarray
    b: np.ndarray

    @classmethod
    def from_reflections(cls, ch: FrequencyChannels, refl: ReflectionSet) -> "SurrogatePoint":
        h = effective_channels(ch, refl.Phi)
        return cls(h.real.copy(), h.imag.copy())

    @property
    def c(self) -> np.ndarray:
        return self.a + 1j * self.b


@dataclass
class SCAResult:
    reflections: ReflectionSet
    trace: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def project_spectral_ball(Phi: np.ndarray) -> np.ndarray:
    """Clip singular values at 1 (Frobenius projection onto ``Phi Phi^H <= I``)."""
    U, sv, Vh = np.linalg.svd(Phi)
    if sv.max(initial=0.0) <= 1.0:
        return Phi
    return (U * np.minimum(sv, 1.0)[..., None, :]) @ Vh


def surrogate_gain(c: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Tangent-plane minorant of ``|h|^2`` at ``c``: ``2 Re(conj(c) h) - |c|^2``."""
    return 2 * np.real(np.conj(c) * h) - np.abs(c) ** 2


def surrogate_objective(ch: FrequencyChannels, p, noise: float, point: SurrogatePoint,
                        Phi: np.ndarray) -> float:
    y = surrogate_gain(point.c, effective_channels(ch, Phi))
    arg = 1 + np.asarray(p) * y / noise
    if np.any(arg <= 0):
        return -np.inf
    return float(np.sum(np.log2(arg)))


def true_objective(ch: FrequencyChannels, p, noise: float, Phi: np.ndarray) -> float:
    h = effective_channels(ch, Phi)
    return float(np.sum(np.log2(1 + np.asarray(p) * np.abs(h) ** 2 / noise)))


def _fallback_phase(c, d):
    if c != 0:
        return c / abs(c)
    if d != 0:
        return d / abs(d)
    return 1.0


def align_full(s: np.ndarray, g: np.ndarray, c: complex, d: complex = 0) -> np.ndarray:
    """Rank-one maximizer of ``Re(conj(c) s^H Phi g)`` over the spectral ball."""
    ns, ng = np.linalg.norm(s), np.linalg.norm(g)
    M = g.shape[0]
    if ns == 0 or ng == 0:
        return np.zeros((M, M), dtype=complex)
    return _fallback_phase(c, d) * np.outer(s, g.conj()) / (ns * ng)


def align_diagonal(s: np.ndarray, g: np.ndarray, c: complex, d: complex = 0) -> np.ndarray:
    coef = np.conj(c) * s.conj() * g
    if c == 0:
        coef = np.conj(_fallback_phase(c, d)) * s.conj() * g
    phase = np.ones(g.shape[0], dtype=complex)
    nz = np.abs(coef) > 0
    phase[nz] = np.conj(coef[nz]) / np.abs(coef[nz])
    return np.diag(phase)


def polar_partial_isometry(X: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Maximizer ``V_r W_r^H`` of ``Re tr(Phi X)`` over the spectral ball.

    ``X = W S V^H``; only the nonzero singular directions are kept, which makes
    the result unique, and symmetric whenever ``X`` is complex symmetric.
    """
    W, sv, Vh = np.linalg.svd(X)
    if sv[0] == 0:
        return np.zeros_like(X)
    r = int(np.sum(sv > rtol * sv[0]))
    return Vh[:r].conj().T @ W[:, :r].conj().T


def align_symmetric(s: np.ndarray, g: np.ndarray, c: complex, d: complex = 0) -> np.ndarray:
    """Maximizer over symmetric ``Phi`` via the symmetrized coefficient matrix.

    For symmetric ``Phi``, ``tr(Phi X) = tr(Phi X^T)``, so ``X`` may be replaced
    by ``(X + X^T)/2`` whose polar factor is itself symmetric (equivalently,
    ``conj(U) U^H`` from the Takagi factorization ``X_s = U S U^T``).
    """
    w = np.conj(c) if c != 0 else np.conj(_fallback_phase(c, d))
    X = w * np.outer(g, s.conj())
    Xs = (X + X.T) / 2
    Phi = polar_partial_isometry(Xs)
    return (Phi + Phi.T) / 2


_ALIGNERS = {"full": align_full, "diagonal": align_diagonal, "symmetric": align_symmetric}


def _solve_common(ch: FrequencyChannels, p, noise: float, point: SurrogatePoint,
                  Phi0: np.ndarray, tol: float = 1e-8, max_iter: int = 500) -> np.ndarray:
    """Projected gradient ascent on the coupled surrogate with one shared ``Phi``."""
    p = np.asarray(p, dtype=float)
    c = point.c
    # surrogate_n = log2(1 + p_n (2 Re(conj(c_n) (d_n + s_n^H Phi g_n)) - |c_n|^2) / noise)
    # gradient wrt Phi (real inner product Re tr(G^H dPhi)): sum_n w_n c_n s_n g_n^H
    outer = np.einsum("n,nm,nk->nmk", c, ch.s, ch.g.conj())

    def f(Phi):
        return surrogate_objective(ch, p, noise, point, np.broadcast_to(Phi, (ch.N,) + Phi.shape))

    def grad(Phi):
        y = surrogate_gain(c, effective_channels(ch, np.broadcast_to(Phi, (ch.N,) + Phi.shape)))
        w = (2 * p / noise) / (1 + p * y / noise) / _LN2
        return np.einsum("n,nmk->mk", w, outer)

    Phi = project_spectral_ball(Phi0.copy())
    fx = f(Phi)
    G = grad(Phi)
    gnorm = np.linalg.norm(G)
    if gnorm == 0:
        return Phi
    step = 1.0 / gnorm
    for _ in range(max_iter):
        improved = False
        for _ls in range(60):
            cand = project_spectral_ball(Phi + step * G)
            fc = f(cand)
            d = cand - Phi
            # Armijo-type sufficient ascent for projected steps
            if fc >= fx + 1e-4 * np.real(np.vdot(G, d)) and fc >= fx:
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        delta = np.linalg.norm(cand - Phi)
        Phi, f_old, fx = cand, fx, fc
        if delta <= tol or fx - f_old <= tol * 1e-3 * max(1.0, abs(fx)):
            break
        G = grad(Phi)
        step *= 2.0
    return Phi


def surrogate_subproblem(point: SurrogatePoint, ch: FrequencyChannels, p, noise: float,
                         structure: str, Phi_current: np.ndarray | None = None) -> ReflectionSet:
    """Maximize the tangent-plane surrogate for the given structure."""
    if not (np.all(np.isfinite(ch.d)) and np.all(np.isfinite(ch.g)) and np.all(np.isfinite(ch.s))):
        raise ValueError("non-finite channel entries")
    if structure == "common":
        start = Phi_current[0] if Phi_current is not None else np.zeros((ch.M, ch.M), complex)
        Phi = _solve_common(ch, p, noise, point, start)
        return ReflectionSet(np.repeat(Phi[None], ch.N, axis=0), "common")
    align = _ALIGNERS[structure]
    c = point.c
    Phi = np.stack([align(ch.s[n], ch.g[n], c[n], ch.d[n]) for n in range(ch.N)])
    return ReflectionSet(Phi, structure)


def sca_reflection(ch: FrequencyChannels, p, noise: float, init: ReflectionSet,
                   tol: float = 1e-6, max_iter: int = 100, slack: float = 1e-12) -> SCAResult:
    """Successive convex approximation for the reflection subproblem.

    The local point is refreshed to the effective channels of the previous
    iterate, so the exact objective never decreases.
    """
    refl = init.copy()
    obj = true_objective(ch, p, noise, refl.Phi)
    result = SCAResult(refl, [obj])
    for it in range(1, max_iter + 1):
        point = SurrogatePoint.from_reflections(ch, refl)
        cand = surrogate_subproblem(point, ch, p, noise, refl.structure, refl.Phi)
        new_obj = true_objective(ch, p, noise, cand.Phi)
        result.iterations = it
        if new_obj < obj:
            # a fixed point up to round-off; keep the incumbent so the trace stays monotone
            if new_obj < obj - slack * max(1.0, abs(obj)):
                log.warning("SCA step decreased the objective: %.17g < %.17g", new_obj, obj)
            result.converged = True
            break
        gain = new_obj - obj
        refl, obj = cand, new_obj
        result.trace.append(obj)
        if gain <= tol * max(abs(obj), 1e-300):
            result.converged = True
            break
    result.reflections = refl
    return result
