"""Independent reference implementations used as test oracles.

Nothing here imports from ``bdirs``; each oracle is coded from the defining
formula (or hands the problem to a generic convex solver) so agreement with
the package is a real cross-check.
"""
import cmath
import math
import warnings

import mpmath
import numpy as np


def branch_admittance_mp(c, R, L1, L2, f, dps=40):
    """Series R-L2-C branch in parallel with L1, in high-precision arithmetic."""
    with mpmath.workdps(dps):
        w = 2 * mpmath.pi * mpmath.mpf(f)
        j = mpmath.mpc(0, 1)
        y = 1 / (j * w * mpmath.mpf(L1))
        if c != 0:
            y += 1 / (mpmath.mpf(R) + j * w * mpmath.mpf(L2) + 1 / (j * w * mpmath.mpf(c)))
        return complex(y)


def naive_dft(taps, N):
    """``x_n = sum_l taps_l exp(-j 2 pi n l / N)`` by direct summation."""
    out = []
    for n in range(N):
        acc = 0j
        for l, t in enumerate(taps):
            acc += complex(t) * cmath.exp(-2j * math.pi * n * l / N)
        out.append(acc)
    return np.array(out)


def waterfill_bisection(gains, P, noise, iters=200):
    """Water level by bisection on ``sum max(mu - noise/g, 0) = P``."""
    g = np.asarray(gains, float)
    floors = np.full(g.shape, np.inf)
    floors[g > 0] = noise / g[g > 0]
    lo, hi = 0.0, floors[np.isfinite(floors)].min() + P
    for _ in range(iters):
        mu = (lo + hi) / 2
        if np.sum(np.maximum(mu - floors, 0.0)) > P:
            hi = mu
        else:
            lo = mu
    mu = (lo + hi) / 2
    return np.maximum(mu - floors, 0.0), mu


def surrogate_cvxpy(d, s, g, c, p, noise, structure):
    """Maximize ``sum log2(1 + p (2 Re(conj c h) - |c|^2)/noise)`` with a generic conic solver.

    ``d (N,)``, ``s, g (N, M)``, ``c (N,)`` and ``p (N,)``; returns the optimal value.
    """
    import cvxpy as cp

    N, M = g.shape
    eye = np.eye(M)

    def ball(X):
        # sigma_max(X) <= 1 as a linear matrix inequality
        return cp.bmat([[eye, X], [X.H, eye]]) >> 0

    cons = []
    if structure == "common":
        X = cp.Variable((M, M), complex=True)
        mats = [X] * N
        cons.append(ball(X))
    elif structure == "diagonal":
        vs = [cp.Variable(M, complex=True) for _ in range(N)]
        mats = [cp.diag(v) for v in vs]
        cons += [cp.abs(v) <= 1 for v in vs]
    else:
        mats = [cp.Variable((M, M), complex=True) for _ in range(N)]
        cons += [ball(X) for X in mats]
        if structure == "symmetric":
            cons += [X == X.T for X in mats]
    terms = []
    for n in range(N):
        h = d[n] + s[n].conj() @ mats[n] @ g[n]
        y = 2 * cp.real(np.conj(c[n]) * h) - abs(c[n]) ** 2
        terms.append(cp.log(1 + p[n] * y / noise) / math.log(2))
    prob = cp.Problem(cp.Maximize(cp.sum(cp.hstack(terms))), cons)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        prob.solve(solver=cp.CLARABEL)
        if prob.status == cp.OPTIMAL:
            return float(prob.value)
        # interior point stopped just short of its tolerance: accept only if a
        # first-order solver independently agrees
        first = prob.value
        prob.solve(solver=cp.SCS, eps=1e-10, max_iters=500_000)
    if prob.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) or abs(prob.value - first) > 1e-6:
        raise RuntimeError(f"oracle solvers disagree: {first!r} vs {prob.value!r} ({prob.status})")
    return float(first)


def sdr_value_cvxpy(d, s, g):
    """Lifted SDP for one carrier: ``|d|^2 + max <W, Mn>`` with ``W >= 0``.

    Constraints: unit-modulus lower diagonal scaled by ``|t_i|^2``, the
    column-sum quadratic ``<= M`` and ``tr(W11) <= M``.
    """
    import cvxpy as cp

    M = g.shape[0]
    M2 = M * M
    t = np.kron(g.conj(), s)
    W = cp.Variable((2 * M2, 2 * M2), hermitian=True)
    W11, W21, W22 = W[:M2, :M2], W[M2:, :M2], W[M2:, M2:]
    D = np.kron(np.eye(M), np.ones((M, M)))
    # |d + t^H q|^2 lifted: W11 = q q^H, W21 = t q^H, so 2 Re(conj(d) t^H q) = 2 Re(d tr(W21))
    obj = cp.real(t.conj() @ W11 @ t) + 2 * cp.real(d * cp.trace(W21))
    cons = [W >> 0, cp.real(cp.trace(D @ W11)) <= M, cp.real(cp.trace(W11)) <= M]
    cons += [cp.real(W22[i, i]) == abs(t[i]) ** 2 for i in range(M2)]
    prob = cp.Problem(cp.Maximize(obj), cons)
    prob.solve(solver=cp.SCS, eps=1e-9, max_iters=200_000)
    return abs(d) ** 2 + float(prob.value)


def median_grid(values, lo=0.0, hi=5.0, step=1e-4):
    grid = np.arange(lo, hi + step / 2, step)
    cost = np.abs(grid[:, None] - np.asarray(values)[None, :]).sum(axis=1)
    return float(grid[np.argmin(cost)])


def projection_socp(T):
    """Optimal value of ``min sum_n ||C - T_n||_F`` over real ``C >= 0`` as a second-order cone program."""
    import cvxpy as cp

    T = np.asarray(T, complex)
    scale = np.abs(T).max()
    Tn = T / scale
    M = T.shape[1]
    C = cp.Variable((M, M), nonneg=True)
    cost = sum(cp.norm(cp.hstack([cp.vec(C - Tn[n].real, order="F"), Tn[n].imag.reshape(-1)]))
               for n in range(T.shape[0]))
    prob = cp.Problem(cp.Minimize(cost))
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    return float(prob.value) * scale
