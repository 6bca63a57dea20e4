import math

import numpy as np
import pytest

from rhoest import (ContractViolationError, DensityFamily, Gaussian,
                    ProductDensity, QuadratureSpec, build_exp_family_grid,
                    build_gaussian_location_grid, build_histogram_family,
                    dimension_bound_entropy, dimension_bound_finite,
                    dimension_bound_vc, eta_bar_finite, integrate_1d,
                    kernel_constants)

QUAD = QuadratureSpec(abs_tol=1e-9)
K2 = kernel_constants("psi2")


class TestDimensionBounds:
    def test_finite_singleton(self):
        assert dimension_bound_finite(1) == pytest.approx(9 * math.log(2), rel=1e-15)
        assert dimension_bound_finite(1) >= 1.0

    def test_finite_eight(self):
        assert dimension_bound_finite(8) == pytest.approx(9 * math.log(16), rel=1e-15)

    def test_finite_monotone(self):
        vals = [dimension_bound_finite(c) for c in range(1, 30)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_vc_log_term_vanishes_at_v_equals_n(self):
        assert dimension_bound_vc(12, 12, 1.0) == pytest.approx(2.0)  # n/6 cap

    def test_vc_plug_in(self):
        assert dimension_bound_vc(3, 300, 1.0) == \
            pytest.approx(3 * (1 + math.log(100)), rel=1e-12)

    def test_vc_cap(self):
        assert dimension_bound_vc(3, 12, 100.0) == 2.0

    def test_vc_monotone_below_cap(self):
        vals = [dimension_bound_vc(v, 10000, 1.0) for v in range(1, 20)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_vc_clamp_warns(self):
        with pytest.warns(UserWarning):
            assert dimension_bound_vc(50, 30, 1.0) == 5.0

    def test_entropy_values(self):
        assert dimension_bound_entropy(0.0) == 18.0
        assert dimension_bound_entropy(2.0 / math.log(2)) == pytest.approx(18.0)
        assert dimension_bound_entropy(10.0) == \
            pytest.approx(18 * 5 * math.log(2), rel=1e-12)

    def test_entropy_rejects_negative(self):
        with pytest.raises(ContractViolationError):
            dimension_bound_entropy(-1.0)


class TestEtaBar:
    def test_singleton_family_closed_form(self):
        fam = DensityFamily([ProductDensity(iid=Gaussian(0, 1), n=1)])
        x0 = math.sqrt(2) * (math.sqrt(1 + K2.beta / K2.a2) + 1)
        expected = x0 * math.sqrt(math.log(2))
        assert eta_bar_finite(fam, K2, quad=QUAD) == pytest.approx(expected, abs=1e-9)

    def test_cap(self):
        fam = DensityFamily([ProductDensity(iid=Gaussian(m, 1), n=1)
                             for m in np.linspace(-1, 1, 6)])
        assert eta_bar_finite(fam, K2, quad=QUAD) <= \
            3 * math.sqrt(math.log(2 * len(fam))) + 1e-12

    def test_monotone_in_center_pool(self):
        fam = DensityFamily([ProductDensity(iid=Gaussian(m, 1), n=1)
                             for m in (-2.0, 2.0)])
        small = DensityFamily([fam.entries[0]])
        eta_small = eta_bar_finite(fam, K2, center_pool=small, quad=QUAD)
        eta_full = eta_bar_finite(fam, K2, center_pool=fam, quad=QUAD)
        assert eta_full >= eta_small - 1e-12


class TestGaussianGrid:
    def test_cardinality(self):
        desc = build_gaussian_location_grid(-1, 1, 1.0, 1.0, n=10)
        assert len(desc.family) == 3

    def test_entries_normalized(self):
        desc = build_gaussian_location_grid(-1, 1, 0.5, 1.0, n=10)
        for entry in desc.family.entries:
            total = integrate_1d(entry.marginal.pdf, -40, 40, QUAD)
            assert total == pytest.approx(1.0, abs=1e-8)

    def test_dim_bound_formula(self):
        n = 500
        desc = build_gaussian_location_grid(-2, 2, 0.01, 1.0, n=n)
        expected = min(3 * (1 + math.log(n / 3)), n / 6)
        assert desc.dim_bound == pytest.approx(expected, rel=1e-12)
        assert desc.vc_index == 3

    def test_bad_grid(self):
        with pytest.raises(ContractViolationError):
            build_gaussian_location_grid(1, -1, 0.5, 1.0, n=10)


class TestHistogramFamily:
    def test_single_piece_is_uniform(self):
        desc = build_histogram_family([(0.0, 1.0)], k=1, n=5, mass_steps=1)
        assert len(desc.family) == 1
        h = desc.family[0].marginal
        assert h.pdf(np.array([0.5]))[0] == 1.0

    def test_two_piece_enumeration_normalized(self):
        desc = build_histogram_family([(0.0, 0.5, 1.0)], k=2, n=5, mass_steps=5)
        assert len(desc.family) == 6   # simplex lattice over 2 cells, 5 steps
        for entry in desc.family.entries:
            h = entry.marginal
            mass = sum(ht * (b2 - b1) for ht, b1, b2 in
                       zip(h.heights, h.breaks[:-1], h.breaks[1:]))
            assert mass == pytest.approx(1.0, abs=1e-12)

    def test_vc_metadata(self):
        desc = build_histogram_family([(0.0, 0.25, 0.5, 1.0)], k=3, n=100)
        assert desc.vc_index == 7

    def test_too_many_pieces(self):
        with pytest.raises(ContractViolationError):
            build_histogram_family([(0.0, 0.5, 1.0)], k=1, n=5)


class TestExpFamilyGrid:
    def test_flat_coefficient_is_uniform(self):
        desc = build_exp_family_grid(("x",), [(0.0,)], 0.0, 1.0, n=5)
        d = desc.family[0].marginal
        assert np.allclose(d.pdf(np.linspace(0.1, 0.9, 9)), 1.0, atol=1e-9)

    def test_gaussian_member(self):
        desc = build_exp_family_grid(("x", "x**2"), [(0.0, -0.5)],
                                     float("-inf"), float("inf"), n=5)
        d = desc.family[0].marginal
        g = Gaussian(0, 1)
        x = np.linspace(-3, 3, 31)
        assert np.allclose(d.pdf(x), g.pdf(x), atol=1e-9)

    def test_vc_metadata(self):
        desc = build_exp_family_grid(("x", "x**2"), [(0.0, -0.5)],
                                     -5.0, 5.0, n=50)
        assert desc.vc_index == 4

    def test_divergent_coefficients_rejected(self):
        with pytest.warns(UserWarning):
            desc = build_exp_family_grid(("x",), [(-1.0,), (1.0,)],
                                         0.0, float("inf"), n=5)
        assert len(desc.family) == 1

    def test_all_divergent_is_error(self):
        with pytest.raises(ContractViolationError):
            build_exp_family_grid(("x",), [(1.0,)], 0.0, float("inf"), n=5)


class TestDescriptor:
    def test_dim_bound_floor(self):
        desc = build_gaussian_location_grid(-1, 1, 1.0, 1.0, n=10)
        assert desc.dim_bound >= 1.0

    def test_json(self):
        desc = build_gaussian_location_grid(-1, 1, 1.0, 1.0, n=10)
        blob = desc.to_json()
        assert blob["size"] == 3
        assert blob["bound_source"] == "vc"
        assert blob["vc_index"] == 3
