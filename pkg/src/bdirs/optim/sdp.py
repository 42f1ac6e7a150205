"""Small dense complex SDP solver (ADMM with eigenvalue projection).

Solves::

    maximize    <C, W>
    subject to  <A_i, W>  = b_i
                <G_j, W> <= h_j
                W Hermitian PSD

with ``<X, Y> = Re tr(X^H Y)``.  The splitting alternates a Frobenius
projection onto the polyhedral set (a tiny QP in the constraint multipliers,
solved by enumerating inequality active sets) with a PSD projection.
Only meant for a handful of inequalities and matrices of side <= ~100.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


@dataclass
class SDPResult:
    W: np.ndarray
    primal: float
    dual_bound: float
    gap: float
    iterations: int
    converged: bool


def _inner(X, Y) -> float:
    return float(np.real(np.vdot(X, Y)))


def _psd_project(X):
    X = (X + X.conj().T) / 2
    vals, vecs = np.linalg.eigh(X)
    pos = vals > 0
    return (vecs[:, pos] * vals[pos]) @ vecs[:, pos].conj().T


class _PolyProjector:
    """Frobenius projection onto {W : <A_i,W> = b_i, <G_j,W> <= h_j}."""

    def __init__(self, A, b, G, h):
        self.mats = list(A) + list(G)
        self.rhs = np.concatenate([np.asarray(b, float), np.asarray(h, float)])
        self.n_eq = len(A)
        self.n_in = len(G)
        k = len(self.mats)
        self.gram = np.array([[_inner(self.mats[i], self.mats[j]) for j in range(k)] for i in range(k)])
        # one constant sparse-ish stack for fast <M_i, V>
        self.stack = np.stack(self.mats) if k else None
        self._solves = {}

    def _gram_inv(self, idx):
        key = tuple(idx)
        if key not in self._solves:
            self._solves[key] = np.linalg.pinv(self.gram[np.ix_(idx, idx)])
        return self._solves[key]

    def __call__(self, V):
        """Return the projection and the multipliers (eq, ineq)."""
        if self.stack is None:
            return V, np.zeros(0), np.zeros(0)
        vals = np.real(np.einsum("kij,ij->k", self.stack.conj(), V))
        resid = vals - self.rhs
        eq = list(range(self.n_eq))
        best = None
        for r in range(self.n_in + 1):
            for act in itertools.combinations(range(self.n_in), r):
                idx = eq + [self.n_eq + j for j in act]
                mult = np.zeros(len(self.mats))
                if idx:
                    mult[idx] = self._gram_inv(idx) @ resid[idx]
                mu = mult[self.n_eq:]
                if np.any(mu < -1e-14):
                    continue
                new_vals = vals - self.gram @ mult
                if np.any(new_vals[self.n_eq:] > self.rhs[self.n_eq:] + 1e-12 * (1 + np.abs(self.rhs[self.n_eq:]))):
                    continue
                # KKT holds for this active set
                best = mult
                break
            if best is not None:
                break
        if best is None:  # pragma: no cover - the QP is always feasible for our constraint sets
            raise RuntimeError("polyhedral projection failed")
        best[self.n_eq:] = np.maximum(best[self.n_eq:], 0)
        W = V - np.einsum("k,kij->ij", best, self.stack)
        return W, best[: self.n_eq], best[self.n_eq:]


def solve_sdp(C, A=(), b=(), G=(), h=(), *, identity_combo=None, rho: float = 1.0,
              tol: float = 1e-6, max_iter: int = 50_000, check_every: int = 25,
              W0=None) -> SDPResult:
    """ADMM for the SDP above.

    ``identity_combo = (coef_eq, coef_in)`` expresses the identity as a
    combination of constraint matrices (``coef_in >= 0``).  When given, a
    certified dual upper bound is computed by shifting the ADMM dual until
    the slack matrix is PSD, and convergence requires a relative duality gap
    below ``tol``.
    """
    C = np.asarray(C, dtype=complex)
    n = C.shape[0]
    proj = _PolyProjector(A, b, G, h)
    Z = np.zeros((n, n), complex) if W0 is None else np.asarray(W0, complex)
    U = np.zeros((n, n), complex)
    cnorm = max(np.linalg.norm(C), 1e-300)
    converged = False
    lam = np.zeros(len(A))
    mu = np.zeros(len(G))
    dual = np.inf
    primal = _inner(C, Z)
    it = 0
    for it in range(1, max_iter + 1):
        W, lam, mu = proj(Z - U + C / rho)
        Z_old = Z
        Z = _psd_project(W + U)
        U = U + W - Z
        if it % check_every:
            continue
        r_pri = np.linalg.norm(W - Z)
        r_dual = rho * np.linalg.norm(Z - Z_old)
        scale = max(np.linalg.norm(W), np.linalg.norm(Z), 1.0)
        primal = _inner(C, Z)
        if identity_combo is not None:
            dual = _dual_bound(C, proj, rho * lam, rho * mu, identity_combo)
            gap = abs(dual - primal) / max(abs(dual), 1.0)
            if gap <= tol and r_pri <= tol * scale:
                converged = True
                break
        elif r_pri <= tol * scale and r_dual <= tol * max(cnorm, 1.0):
            converged = True
            break
        # residual balancing
        if r_pri > 10 * r_dual / max(cnorm, 1e-300) * scale:
            rho *= 2.0
            U /= 2.0
        elif r_dual / max(cnorm, 1e-300) * scale > 10 * r_pri:
            rho /= 2.0
            U *= 2.0
    primal = _inner(C, Z)
    if identity_combo is not None:
        dual = _dual_bound(C, proj, rho * lam, rho * mu, identity_combo)
    gap = abs(dual - primal) / max(abs(dual), 1.0) if np.isfinite(dual) else np.inf
    return SDPResult(Z, primal, dual, gap, it, converged)


def _dual_bound(C, proj: _PolyProjector, lam, mu, identity_combo) -> float:
    """Weak-duality upper bound from multipliers, repaired to dual feasibility."""
    coef_eq, coef_in = identity_combo
    mu = np.maximum(mu, 0)
    coeffs = np.concatenate([lam, mu])
    S = np.einsum("k,kij->ij", coeffs, proj.stack) - C
    shift = max(0.0, -float(np.linalg.eigvalsh((S + S.conj().T) / 2).min()))
    coeffs = coeffs + shift * np.concatenate([coef_eq, coef_in])
    return float(coeffs @ proj.rhs)
