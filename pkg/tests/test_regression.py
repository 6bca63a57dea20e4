import math

import numpy as np
import pytest

from rhoest import (Cauchy, ContractViolationError, Gaussian,
                    QuadratureSpec, RegressionFunction, RegressionModel,
                    Sample, Uniform, build_regression_family,
                    check_identifiability, d_s_loss, fit_regression,
                    kernel_constants)

QUAD = QuadratureSpec(abs_tol=1e-10)
K2 = kernel_constants("psi2")


def linear_functions(thetas):
    return [RegressionFunction(lambda w, _t=float(t): _t * w,
                               label=f"theta={t:g}") for t in thetas]


def pair_sample(rng, n, theta, error):
    w = rng.uniform(-2, 2, n)
    y = theta * w + error.sample(rng, n)
    return Sample(np.column_stack([w, y]), kind="pair")


class TestBuild:
    def test_single_zero_function(self):
        g0 = RegressionFunction(lambda w: np.zeros_like(w), label="zero")
        model = RegressionModel(Gaussian(0, 1), [g0], vc_index_f=1)
        coll = build_regression_family([model], n=4)
        assert len(coll.union_family) == 1
        X = Sample(np.array([[0.0, 1.0], [1.0, -0.5], [2.0, 0.0], [0.5, 2.0]]),
                   kind="pair")
        vals = coll.union_family[0].coord_values(X)
        assert np.allclose(vals, Gaussian(0, 1).pdf(X.points[:, 1]))

    def test_vc_scaling(self):
        model = RegressionModel(Gaussian(0, 1), linear_functions(np.linspace(0, 2, 21)),
                                vc_index_f=3)
        coll = build_regression_family([model], n=1000)
        assert coll.models[0].vc_index == math.ceil(9.41 * 3)

    def test_pointwise_entry_oracle(self):
        rng = np.random.default_rng(0)
        model = RegressionModel(Cauchy(0, 1), linear_functions([0.5, 1.5]),
                                vc_index_f=3)
        coll = build_regression_family([model], n=6)
        X = Sample(np.column_stack([rng.uniform(-1, 1, 6), rng.normal(0, 1, 6)]),
                   kind="pair")
        for idx, theta in enumerate((0.5, 1.5)):
            got = coll.union_family[idx].coord_values(X)
            want = Cauchy(0, 1).pdf(X.points[:, 1] - theta * X.points[:, 0])
            assert np.allclose(got, want)

    def test_empty_function_menu(self):
        with pytest.raises(ContractViolationError):
            RegressionModel(Gaussian(0, 1), [], vc_index_f=3)

    def test_multimodal_warns(self):
        g0 = RegressionFunction(lambda w: np.zeros_like(w), label="zero")
        with pytest.warns(UserWarning):
            RegressionModel(Gaussian(0, 1), [g0], vc_index_f=1,
                            mode_multiplier=2.0)


class TestFit:
    def test_degenerate_single_entry(self):
        g0 = RegressionFunction(lambda w: np.zeros_like(w), label="zero")
        model = RegressionModel(Gaussian(0, 1), [g0], vc_index_f=1)
        coll = build_regression_family([model], n=3)
        X = Sample(np.array([[0.0, 0.1], [1.0, -0.2], [2.0, 0.3]]), kind="pair")
        fit = fit_regression(X, coll, [model])
        assert fit.f_hat.label == "zero"
        assert fit.s_hat == Gaussian(0, 1)

    def test_scalar_sample_rejected(self):
        g0 = RegressionFunction(lambda w: np.zeros_like(w), label="zero")
        model = RegressionModel(Gaussian(0, 1), [g0], vc_index_f=1)
        coll = build_regression_family([model], n=3)
        with pytest.raises(ContractViolationError):
            fit_regression(Sample(np.array([0.0, 1.0, 2.0])), coll, [model])

    def test_zero_function_recovered(self):
        hits = 0
        reps = 20
        for rep in range(reps):
            rng = np.random.default_rng(300 + rep)
            model = RegressionModel(Gaussian(0, 1),
                                    linear_functions(np.arange(-1, 1.01, 0.25)),
                                    vc_index_f=3)
            coll = build_regression_family([model], n=300)
            X = pair_sample(rng, 300, 0.0, Gaussian(0, 1))
            fit = fit_regression(X, coll, [model])
            hits += fit.f_hat.label == "theta=0"
        assert hits / reps >= 0.95


class TestDsLoss:
    def test_equal_functions(self):
        g = lambda w: w
        assert d_s_loss(Gaussian(0, 1), g, g, np.linspace(-1, 1, 5), QUAD) == 0.0

    def test_constant_shift_closed_form(self):
        c = 0.8
        got = d_s_loss(Gaussian(0, 1), lambda w: np.zeros_like(w),
                       lambda w: np.full_like(w, c), np.linspace(-1, 1, 7), QUAD)
        assert got == pytest.approx(1 - math.exp(-c * c / 8), abs=1e-10)

    def test_uniform_overlap(self):
        got = d_s_loss(Uniform(0, 1), lambda w: np.zeros_like(w),
                       lambda w: np.full_like(w, 0.5), np.array([0.0]), QUAD)
        assert got == pytest.approx(0.5, abs=1e-8)

    def test_translation_invariance(self):
        w = np.linspace(-1, 1, 6)
        g = lambda x: x
        gp = lambda x: 0.5 * x + 0.3
        base = d_s_loss(Gaussian(0, 1), g, gp, w, QUAD)
        shiftd = d_s_loss(Gaussian(0, 1), lambda x: g(x) + 2.0,
                          lambda x: gp(x) + 2.0, w, QUAD)
        assert base == pytest.approx(shiftd, abs=1e-9)

    def test_pseudometric(self):
        w = np.linspace(-1, 1, 5)
        fns = [lambda x: 0.0 * x, lambda x: 0.5 * x, lambda x: x]
        s = Gaussian(0, 1)
        d01 = math.sqrt(d_s_loss(s, fns[0], fns[1], w, QUAD))
        d12 = math.sqrt(d_s_loss(s, fns[1], fns[2], w, QUAD))
        d02 = math.sqrt(d_s_loss(s, fns[0], fns[2], w, QUAD))
        assert d02 <= d01 + d12 + 1e-8
        assert d_s_loss(s, fns[0], fns[2], w, QUAD) == \
            pytest.approx(d_s_loss(s, fns[2], fns[0], w, QUAD), abs=1e-12)


class TestIdentifiability:
    GRID = np.arange(-2.0, 2.01, 0.25)

    def test_identical_pair_convention(self):
        out = check_identifiability([Gaussian(0, 1), Gaussian(0, 1)],
                                    self.GRID, QUAD)
        assert out["pairs"][(0, 1)] == 1.0

    def test_centered_gaussians_minimized_at_zero_shift(self):
        out = check_identifiability([Gaussian(0, 1), Gaussian(0, 2)],
                                    self.GRID, QUAD)
        assert out["pairs"][(0, 1)] == pytest.approx(1.0, abs=1e-6)

    def test_uniform_pair_finite(self):
        out = check_identifiability([Uniform(0, 1), Uniform(0, 2)],
                                    self.GRID, QUAD)
        assert math.isfinite(out["max_ratio"])
        assert out["max_ratio"] >= 1.0

    def test_asymmetric_grid_rejected(self):
        with pytest.raises(ContractViolationError):
            check_identifiability([Gaussian(0, 1), Gaussian(1, 1)],
                                  [0.0, 0.5], QUAD)
