import math

import numpy as np
import pytest

from rhoest import (CandidateSet, ContractViolationError, Gaussian,
                    InnerSolverConfig, ProductDensity, Sample, SimplexPoint,
                    inner_argmax, kernel_constants, mixture_upsilon,
                    saddle_point, select_candidate, simplex_grid, t_mix)
from rhoest.aggregation import simplex_grid_array
from rhoest.errors import DegenerateCandidatesError

K2 = kernel_constants("psi2")


def gaussian_candidates(means, X):
    return CandidateSet([ProductDensity(iid=Gaussian(m, 1), n=X.n)
                         for m in means], X)


def golden_section_argmax(fn, lo, hi, tol=1e-10):
    phi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


class TestSimplexPoint:
    def test_validation(self):
        SimplexPoint((0.25, 0.75))
        with pytest.raises(ContractViolationError):
            SimplexPoint((0.5, 0.6))
        with pytest.raises(ContractViolationError):
            SimplexPoint((-0.1, 1.1))

    def test_vertex(self):
        v = SimplexPoint.vertex(1, 3)
        assert v.weights == (0.0, 1.0, 0.0)

    def test_grid_covers_simplex(self):
        pts = list(simplex_grid(3, 4))
        assert len(pts) == 15    # C(4+2, 2)
        arr = simplex_grid_array(3, 4)
        assert arr.shape == (15, 3)
        assert np.allclose(arr.sum(axis=1), 1.0)


class TestCandidateSet:
    def test_positive_values_required(self):
        X = Sample(np.array([0.0, 10.0]))
        from rhoest import Uniform
        with pytest.raises(ContractViolationError):
            CandidateSet([ProductDensity(iid=Uniform(0, 1), n=2)], X)

    def test_condition_number_of_dependent_rows(self):
        X = Sample(np.array([0.0, 1.0]))
        d = ProductDensity(iid=Gaussian(0, 1), n=2)
        cs = CandidateSet([d, d], X)
        assert cs.condition_number() > 1e10


class TestSelectCandidate:
    def test_single_candidate(self):
        X = Sample(np.array([0.0, 0.5]))
        fit = select_candidate(X, [ProductDensity(iid=Gaussian(0, 1), n=2)],
                               [0.0], K2)
        assert fit.chosen_index == 0

    def test_weight_budget(self):
        X = Sample(np.array([0.0, 0.5]))
        cands = [ProductDensity(iid=Gaussian(m, 1), n=2) for m in (0, 1)]
        with pytest.raises(ContractViolationError):
            select_candidate(X, cands, [0.0, 0.0], K2)

    def test_separated_candidates(self):
        hits = 0
        for rep in range(30):
            rng = np.random.default_rng(50 + rep)
            X = Sample(rng.normal(0, 1, 100))
            cands = [ProductDensity(iid=Gaussian(0, 1), n=100),
                     ProductDensity(iid=Gaussian(5, 1), n=100)]
            fit = select_candidate(X, cands, [math.log(2), math.log(2)], K2)
            hits += fit.chosen_index == 0
        assert hits == 30

    def test_identical_candidates_tie_break(self):
        X = Sample(np.array([0.0, 0.5]))
        d = ProductDensity(iid=Gaussian(0, 1), n=2)
        fit = select_candidate(X, [d, d], [math.log(2), 5.0], K2)
        assert fit.chosen_index == 0


class TestTMix:
    def test_diagonal_zero(self):
        X = Sample(np.random.default_rng(0).normal(0, 1, 10))
        cs = gaussian_candidates([-1, 0, 1], X)
        a = SimplexPoint((0.2, 0.5, 0.3))
        assert t_mix(X, cs, a, a, K2) == 0.0

    def test_antisymmetry(self):
        rng = np.random.default_rng(1)
        X = Sample(rng.normal(0, 1, 15))
        cs = gaussian_candidates([-1, 0, 1], X)
        for _ in range(20):
            w = rng.dirichlet(np.ones(3))
            v = rng.dirichlet(np.ones(3))
            a, b = SimplexPoint(tuple(w)), SimplexPoint(tuple(v))
            assert abs(t_mix(X, cs, a, b, K2) + t_mix(X, cs, b, a, K2)) <= 1e-12

    def test_hand_value(self):
        # one sample point, candidate values 1 and 4: psi2(sqrt(4)) = 1/3
        X = Sample(np.array([0.0]))
        from rhoest import Tabulated
        p1 = ProductDensity(iid=Tabulated((-1.0, 0.0, 1.0), (1.0, 1.0, 1.0)), n=1)
        p2 = ProductDensity(iid=Tabulated((-1.0, 0.0, 1.0), (4.0, 4.0, 4.0)), n=1)
        cs = CandidateSet([p1, p2], X)
        val = t_mix(X, cs, SimplexPoint((1.0, 0.0)), SimplexPoint((0.0, 1.0)), K2)
        assert val == pytest.approx(1 / 3, abs=1e-15)

    def test_concavity_in_beta(self):
        rng = np.random.default_rng(2)
        X = Sample(rng.normal(0, 1, 12))
        cs = gaussian_candidates([-1, 0, 1], X)
        a = SimplexPoint((1 / 3, 1 / 3, 1 / 3))
        for _ in range(20):
            b1 = SimplexPoint(tuple(rng.dirichlet(np.ones(3))))
            b2 = SimplexPoint(tuple(rng.dirichlet(np.ones(3))))
            mid = SimplexPoint(tuple(0.5 * (np.array(b1.weights)
                                            + np.array(b2.weights))))
            chord = 0.5 * (t_mix(X, cs, a, b1, K2) + t_mix(X, cs, a, b2, K2))
            assert t_mix(X, cs, a, mid, K2) >= chord - 1e-10


class TestInnerArgmax:
    def test_identical_candidates_flat_objective(self):
        X = Sample(np.array([0.0, 1.0]))
        d = ProductDensity(iid=Gaussian(0, 1), n=2)
        cs = CandidateSet([d, d], X)
        alpha = SimplexPoint((0.5, 0.5))
        beta = inner_argmax(X, cs, alpha, K2)
        assert beta.weights == tuple(beta.weights)   # valid simplex point
        assert abs(sum(beta.weights) - 1.0) <= 1e-12

    def test_two_candidates_golden_section_oracle(self):
        rng = np.random.default_rng(3)
        X = Sample(rng.normal(0.5, 1, 20))
        cs = gaussian_candidates([0.0, 1.0], X)
        alpha = SimplexPoint((0.5, 0.5))

        def obj(b):
            return t_mix(X, cs, alpha, SimplexPoint((b, 1.0 - b)), K2)

        b_star = golden_section_argmax(obj, 0.0, 1.0)
        beta = inner_argmax(X, cs, alpha, K2,
                            InnerSolverConfig(tol=1e-12, max_iter=20000))
        assert obj(beta.weights[0]) == pytest.approx(obj(b_star), abs=1e-6)
        assert beta.weights[0] == pytest.approx(b_star, abs=1e-3)


class TestSaddlePoint:
    def test_single_candidate(self):
        X = Sample(np.array([0.0, 1.0]))
        cs = CandidateSet([ProductDensity(iid=Gaussian(0, 1), n=2)], X)
        out = saddle_point(X, cs, K2)
        assert out["alpha_star"].weights == (1.0,)
        assert out["certificate"] == 0.0
        assert out["converged"]

    def test_eps_validation(self):
        X = Sample(np.array([0.0, 1.0]))
        cs = gaussian_candidates([0.0, 1.0], X)
        with pytest.raises(ContractViolationError):
            saddle_point(X, cs, K2, eps=0.0)

    def test_degenerate_candidates_rejected(self):
        X = Sample(np.array([0.0, 1.0, 2.0]))
        d = ProductDensity(iid=Gaussian(0, 1), n=3)
        cs = CandidateSet([d, d], X)
        with pytest.raises(DegenerateCandidatesError):
            saddle_point(X, cs, K2)

    def test_dominant_candidate_gets_weight(self):
        hits = 0
        reps = 30
        for rep in range(reps):
            rng = np.random.default_rng(200 + rep)
            X = Sample(rng.normal(0, 1, 200))
            cs = gaussian_candidates([0.0, 3.0], X)
            out = saddle_point(X, cs, K2)
            assert out["converged"]
            hits += out["alpha_star"].weights[0] >= 0.9
        assert hits / reps >= 0.95

    def test_grid_oracle_three_candidates(self):
        rng = np.random.default_rng(5)
        X = Sample(rng.normal(0, 1, 5))
        cs = gaussian_candidates([-0.5, 0.2, 0.9], X)
        out = saddle_point(X, cs, K2, eps=1e-4)
        assert out["converged"]
        assert out["certificate"] < 1e-4
        ups = mixture_upsilon(X, cs, out["alpha_star"], grid_steps=100, kernel=K2)
        assert ups < 1e-4 + 1e-3

    def test_two_sided_saddle_property(self):
        rng = np.random.default_rng(6)
        X = Sample(rng.normal(0, 1, 30))
        cs = gaussian_candidates([-1.0, 0.0, 1.0], X)
        out = saddle_point(X, cs, K2, eps=1e-5)
        alpha = out["alpha_star"]
        for g in simplex_grid(3, 10):
            assert t_mix(X, cs, alpha, g, K2) <= 1e-5 + 1e-9
            assert t_mix(X, cs, g, alpha, K2) >= -(1e-5 + 1e-9)
