"""Common capacitance matrix nearest to a set of per-subcarrier targets.

Solves ``min_C sum_n ||C - T_n||_F`` over real, entrywise nonnegative ``C``
(optionally also symmetric) for complex targets ``T_n``.  For real ``C``::

    ||C - T_n||_F^2 = ||C - Re T_n||_F^2 + ||Im T_n||_F^2

so this is a Fermat-Weber problem with points ``Re T_n`` lifted by heights
``||Im T_n||_F``.  Weiszfeld's map minimizes an isotropic quadratic
majorizer, whose constrained minimizer is the projection of the weighted
mean, so projected Weiszfeld iterations are monotone.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ProjectionResult:
    C: np.ndarray
    objective: float
    iterations: int


def _split(targets, symmetric: bool):
    T = np.asarray(targets, dtype=complex)
    if T.ndim == 2:
        T = T[None]
    if not np.all(np.isfinite(T)):
        raise ValueError("targets must be finite")
    R = T.real
    heights2 = np.sum(T.imag ** 2, axis=(1, 2))
    if symmetric:
        Rt = np.swapaxes(R, 1, 2)
        anti = (R - Rt) / 2
        R = (R + Rt) / 2
        heights2 = heights2 + np.sum(anti ** 2, axis=(1, 2))
    return R, heights2


def _project(X, symmetric: bool):
    if symmetric:
        X = (X + X.T) / 2
    return np.maximum(X, 0.0)


def projection_objective(C, targets) -> float:
    T = np.asarray(targets, dtype=complex)
    if T.ndim == 2:
        T = T[None]
    return float(np.sum(np.linalg.norm(C[None] - T, axis=(1, 2))))


def objective_gradient(C, targets, eps: float = 0.0) -> np.ndarray:
    """Gradient of the objective in ``C`` (real part of the unit residual directions).

    Terms with zero distance contribute nothing (their subdifferential contains 0).
    """
    T = np.asarray(targets, dtype=complex)
    if T.ndim == 2:
        T = T[None]
    diff = C[None] - T
    dist = np.linalg.norm(diff, axis=(1, 2))
    keep = dist > eps
    return np.sum(diff.real[keep] / dist[keep, None, None], axis=0)


def project_capacitance(targets, *, symmetric: bool = False, max_iter: int = 10_000,
                        step_tol: float = 1e-12, coincide_tol: float = 1e-15) -> ProjectionResult:
    """Projected Weiszfeld iteration with a Vardi-Zhang step at data points.

    Targets are normalized by their largest magnitude so the tolerances are
    relative to the capacitance scale.
    """
    R, h2 = _split(targets, symmetric)
    scale = float(max(np.abs(R).max(initial=0.0), np.sqrt(h2.max(initial=0.0))))
    if scale == 0:
        C = np.zeros(R.shape[1:])
        return ProjectionResult(C, projection_objective(C, targets), 0)
    R = R / scale
    h2 = h2 / scale ** 2

    def dists(X):
        return np.sqrt(np.sum((X[None] - R) ** 2, axis=(1, 2)) + h2)

    X = _project(R.mean(axis=0), symmetric)
    it = 0
    for it in range(1, max_iter + 1):
        dist = dists(X)
        at = dist < coincide_tol
        if at.any():
            # iterate sits on an (unlifted) data point: Vardi-Zhang modified step
            w = np.zeros_like(dist)
            w[~at] = 1 / dist[~at]
            if w.sum() == 0:
                break
            T = np.einsum("n,nij->ij", w, R) / w.sum()
            Rt = np.einsum("n,nij->ij", w, R - X[None])
            r = np.linalg.norm(_project(X + Rt, symmetric) - X)
            eta = float(at.sum())
            if r <= eta:
                break
            gamma = min(1.0, eta / r)
            X_new = _project((1 - gamma) * T + gamma * X, symmetric)
        else:
            w = 1 / dist
            X_new = _project(np.einsum("n,nij->ij", w, R) / w.sum(), symmetric)
        step = np.linalg.norm(X_new - X)
        X = X_new
        if step < step_tol:
            break
    C = X * scale
    if symmetric:
        C = (C + C.T) / 2
    return ProjectionResult(C, projection_objective(C, targets), it)
