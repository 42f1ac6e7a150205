import numpy as np
import pytest

from bdirs.channel import FrequencyChannels, effective_channels
from bdirs.optim.init import (cascade_vector, column_sum_form, column_sum_quadratic,
                              init_reflection_closed_form, init_reflection_sdr, unvec, vec)
from bdirs.optim.reflection import project_spectral_ball
from bdirs.optim.sdp import solve_sdp
from oracles import sdr_value_cvxpy


def cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def rand_channels(rng, M, N):
    return FrequencyChannels(cn(rng, N), cn(rng, N, M), cn(rng, N, M))


def test_vectorization_identity():
    rng = np.random.default_rng(28)
    for M in (1, 2, 3):
        s, g, Phi = cn(rng, M), cn(rng, M), cn(rng, M, M)
        t = cascade_vector(s, g)
        assert np.vdot(t, vec(Phi)) == pytest.approx(s.conj() @ Phi @ g, rel=1e-13)
        assert np.array_equal(unvec(vec(Phi), M), Phi)


def test_column_sum_form():
    rng = np.random.default_rng(29)
    Phi = cn(rng, 3, 3)
    q = vec(Phi)
    direct = np.sum(np.abs(Phi.sum(axis=0)) ** 2)
    assert np.real(q.conj() @ column_sum_form(3) @ q) == pytest.approx(direct, rel=1e-13)


def test_forward_direction():
    rng = np.random.default_rng(30)
    for _ in range(1000):
        M = int(rng.integers(1, 6))
        Phi = project_spectral_ball(cn(rng, M, M) * rng.uniform(0.1, 3))
        assert column_sum_quadratic(Phi) <= M + 1e-9


def test_converse_counterexample():
    Phi = np.array([[2.0, 0.0], [-2.0, 0.0]])
    assert column_sum_quadratic(Phi) == 0.0
    assert np.linalg.norm(Phi, 2) == pytest.approx(2 * np.sqrt(2), rel=1e-15)
    assert column_sum_quadratic(Phi) <= 2 and np.linalg.norm(Phi, 2) > 1


def test_sdp_solver_small_lp():
    # maximize <C, W> with diag(W) = 1, W >= 0: max-cut style, optimum n * lambda_max for C = 11^T
    n = 3
    C = np.ones((n, n))
    A = []
    for i in range(n):
        Ai = np.zeros((n, n))
        Ai[i, i] = 1.0
        A.append(Ai)
    res = solve_sdp(C, A, [1.0] * n, identity_combo=(np.ones(n), np.zeros(0)))
    assert res.converged
    assert res.primal == pytest.approx(9.0, rel=1e-5)
    # the certified bound is valid even though the ADMM iterate is feasible only to tolerance
    assert res.dual_bound >= 9.0 - 1e-9


def test_value_matches_convex_solver():
    rng = np.random.default_rng(31)
    ch = rand_channels(rng, 2, 3)
    rep = init_reflection_sdr(ch, Q=10, rng=rng)
    for n, car in enumerate(rep.carriers):
        ref = sdr_value_cvxpy(ch.d[n], ch.s[n], ch.g[n])
        assert car.value == pytest.approx(ref, rel=1e-4)


def test_upper_bounds_and_keep_better():
    rng = np.random.default_rng(32)
    for _ in range(10):
        ch = rand_channels(rng, 2, 4)
        rep = init_reflection_sdr(ch, Q=50, rng=rng)
        bound = np.abs(ch.d) + np.linalg.norm(ch.s, axis=1) * np.linalg.norm(ch.g, axis=1)
        assert rep.sdr_value >= np.sum(bound ** 2) - 1e-6
        assert rep.reflections.max_singular_value() <= 1 + 1e-9
        base = np.abs(effective_channels(ch, init_reflection_closed_form(ch).Phi))
        assert np.all(np.abs(effective_channels(ch, rep.reflections.Phi)) >= base - 1e-9)


def test_randomization_path_deterministic():
    ch = rand_channels(np.random.default_rng(33), 2, 2)
    a = init_reflection_sdr(ch, Q=5, rng=np.random.default_rng(1), rank_tol=-1.0)
    b = init_reflection_sdr(ch, Q=5, rng=np.random.default_rng(1), rank_tol=-1.0)
    assert not any(c.rank_one for c in a.carriers)
    assert np.array_equal(a.reflections.Phi, b.reflections.Phi)
    assert a.reflections.max_singular_value() <= 1 + 1e-9


def test_invalid_Q():
    with pytest.raises(ValueError):
        init_reflection_sdr(rand_channels(np.random.default_rng(0), 2, 1), Q=0)
