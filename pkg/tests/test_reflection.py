import numpy as np
import pytest

from bdirs.channel import FrequencyChannels, effective_channels
from bdirs.optim.init import init_reflection_closed_form
from bdirs.optim.pipeline import alternating_optimize
from bdirs.optim.reflection import (STRUCTURES, ReflectionSet, SurrogatePoint, align_diagonal,
                                    align_full, align_symmetric, polar_partial_isometry,
                                    project_spectral_ball, sca_reflection, surrogate_gain,
                                    surrogate_objective, surrogate_subproblem, true_objective)
from bdirs.optim.waterfill import waterfill
from oracles import surrogate_cvxpy


def cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def rand_channels(rng, M, N):
    return FrequencyChannels(cn(rng, N), cn(rng, N, M), cn(rng, N, M))


def spectral_bound(ch):
    return np.abs(ch.d) + np.linalg.norm(ch.s, axis=1) * np.linalg.norm(ch.g, axis=1)


class TestClosedForms:
    def test_full_alignment_example(self):
        Phi = align_full(np.array([1, 0]), np.array([0, 1]), 1.0)
        assert np.array_equal(Phi, [[0, 1], [0, 0]])

    def test_diagonal_alignment_example(self):
        v = np.ones(2) / np.sqrt(2)
        Phi = align_diagonal(v, v, 1.0)
        assert np.allclose(Phi, np.eye(2), atol=1e-15)
        assert np.vdot(v, Phi @ v) == pytest.approx(1.0)

    def test_initializer_examples(self):
        ch = FrequencyChannels(np.array([0j]), np.array([[0, 1]], complex), np.array([[1, 0]], complex))
        refl = init_reflection_closed_form(ch)
        assert np.allclose(refl.Phi[0], [[0, 1], [0, 0]])
        e1 = np.array([[1, 0]], complex)
        ch = FrequencyChannels(np.array([2 + 0j]), e1, e1)
        refl = init_reflection_closed_form(ch)
        assert np.allclose(refl.Phi[0], [[1, 0], [0, 0]])
        assert abs(effective_channels(ch, refl.Phi)[0]) == pytest.approx(3.0)

    def test_initializer_attains_norm_product(self):
        rng = np.random.default_rng(13)
        ch = rand_channels(rng, 3, 32)
        h = effective_channels(ch, init_reflection_closed_form(ch).Phi)
        assert np.abs(np.abs(h) - spectral_bound(ch)).max() <= 1e-12 * spectral_bound(ch).max()

    def test_polar_factor_maximizes_trace(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            X = cn(rng, 3, 3)
            Phi = polar_partial_isometry(X)
            best = np.real(np.trace(Phi @ X))
            assert best == pytest.approx(np.linalg.svd(X, compute_uv=False).sum(), rel=1e-12)
            for _ in range(20):
                Y = project_spectral_ball(cn(rng, 3, 3) * 2)
                assert np.real(np.trace(Y @ X)) <= best + 1e-12

    def test_symmetric_alignment_is_symmetric_and_tight(self):
        rng = np.random.default_rng(15)
        for _ in range(20):
            s, g = cn(rng, 4), cn(rng, 4)
            Phi = align_symmetric(s, g, 1.0)
            assert np.abs(Phi - Phi.T).max() <= 1e-14
            assert np.linalg.norm(Phi, 2) <= 1 + 1e-12
            # nuclear norm of the symmetrized rank-one coefficient still equals ||s|| ||g||
            assert abs(np.vdot(s, Phi @ g)) == pytest.approx(np.linalg.norm(s) * np.linalg.norm(g), rel=1e-10)

    def test_spectral_ball_projection(self):
        rng = np.random.default_rng(16)
        X = cn(rng, 5, 4, 4) * 3
        Y = project_spectral_ball(X)
        assert np.linalg.norm(Y, 2, axis=(1, 2)).max() <= 1 + 1e-12
        inside = 0.5 * X[0] / np.linalg.norm(X[0], 2)
        assert np.array_equal(project_spectral_ball(inside), inside)


class TestSurrogate:
    def test_minorant_and_tangency(self):
        rng = np.random.default_rng(17)
        c = cn(rng, 100)
        h = cn(rng, 100)
        assert np.all(surrogate_gain(c, h) <= np.abs(h) ** 2 + 1e-12)
        assert np.allclose(surrogate_gain(c, c), np.abs(c) ** 2, rtol=1e-14)

    @pytest.mark.parametrize("structure", STRUCTURES)
    def test_matches_convex_solver(self, structure):
        rng = np.random.default_rng(18)
        for _ in range(10):
            ch = rand_channels(rng, 2, 2)
            p = rng.uniform(0.5, 2.0, 2)
            noise = 0.3
            start = project_spectral_ball(cn(rng, 2, 2) * 0.5)
            if structure == "diagonal":
                start = np.diag(np.diag(start))
            if structure == "symmetric":
                start = (start + start.T) / 2
            Phi0 = np.repeat(start[None], 2, axis=0)
            point = SurrogatePoint.from_reflections(ch, ReflectionSet(Phi0, structure))
            out = surrogate_subproblem(point, ch, p, noise, structure, Phi0)
            ours = surrogate_objective(ch, p, noise, point, out.Phi)
            ref = surrogate_cvxpy(ch.d, ch.s, ch.g, point.c, p, noise, structure)
            assert abs(ours - ref) <= 1e-5 * max(1.0, abs(ref))
            assert out.max_singular_value() <= 1 + 1e-9

    def test_structure_nesting(self):
        rng = np.random.default_rng(19)
        for _ in range(10):
            ch = rand_channels(rng, 3, 4)
            p = np.ones(4)
            Phi0 = np.zeros((4, 3, 3), complex)
            vals = {}
            for structure in STRUCTURES:
                point = SurrogatePoint.from_reflections(ch, ReflectionSet(Phi0, structure))
                out = surrogate_subproblem(point, ch, p, 1.0, structure, Phi0)
                vals[structure] = surrogate_objective(ch, p, 1.0, point, out.Phi)
            for other in ("symmetric", "diagonal", "common"):
                assert vals["full"] >= vals[other] - 1e-9


class TestSCA:
    def test_fixed_point(self):
        rng = np.random.default_rng(20)
        ch = rand_channels(rng, 3, 8)
        init = init_reflection_closed_form(ch)
        res = sca_reflection(ch, np.ones(8), 1.0, init)
        assert res.iterations == 1 and res.converged
        assert res.trace[-1] == res.trace[0]

    def test_from_zero_reaches_bound(self):
        rng = np.random.default_rng(21)
        ch = rand_channels(rng, 4, 8)
        res = sca_reflection(ch, np.ones(8), 1.0, ReflectionSet(np.zeros((8, 4, 4)), "full"))
        h = effective_channels(ch, res.reflections.Phi)
        assert np.abs(np.abs(h) - spectral_bound(ch)).max() <= 1e-6 * spectral_bound(ch).max()

    @pytest.mark.parametrize("structure", STRUCTURES)
    def test_trace_monotone(self, structure):
        rng = np.random.default_rng(22)
        for _ in range(5):
            ch = rand_channels(rng, 3, 6)
            p = rng.uniform(0, 3, 6)
            init = ReflectionSet(np.zeros((6, 3, 3)), structure)
            res = sca_reflection(ch, p, 0.5, init)
            assert np.all(np.diff(res.trace) >= 0)
            assert res.trace[-1] == pytest.approx(true_objective(ch, p, 0.5, res.reflections.Phi))


class TestAlternating:
    def test_single_carrier_closed_form(self):
        rng = np.random.default_rng(23)
        ch = rand_channels(rng, 3, 1)
        ao = alternating_optimize(ch, 2.0, 0.5, init_reflection_closed_form(ch))
        ref = np.log2(1 + 2.0 * spectral_bound(ch)[0] ** 2 / 0.5)
        assert ao.trace[0] == pytest.approx(ref, rel=1e-12)

    def test_zero_power(self):
        rng = np.random.default_rng(24)
        ch = rand_channels(rng, 2, 4)
        ao = alternating_optimize(ch, 0.0, 1.0, init_reflection_closed_form(ch))
        assert ao.trace == [0.0] and ao.objective == 0.0 and ao.converged

    def test_attains_bound_and_monotone(self):
        rng = np.random.default_rng(25)
        for M in (2, 4):
            for _ in range(5):
                ch = rand_channels(rng, M, 8)
                ao = alternating_optimize(ch, 5.0, 1.0, ReflectionSet(np.zeros((8, M, M)), "full"))
                assert np.all(np.diff(ao.trace) >= 0)
                gains = spectral_bound(ch) ** 2
                ref = np.sum(np.log2(1 + waterfill(gains, 5.0, 1.0).p * gains))
                assert ao.objective == pytest.approx(ref, rel=1e-6)
