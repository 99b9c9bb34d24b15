"""GOE module tests: closed forms against the brute-force quadrature oracle.

The oracle integrates the ordered-eigenvalue density directly (nested
Gauss-Legendre with exact innermost moments) and is the independent route for
every closed-form value asserted here.
"""

import math

import numpy as np
import pytest

from isopeak import ConvergenceError, DomainError
from isopeak.goe import (
    GoeQuery,
    chamber_product_quadrature,
    eigen_density_normalization,
    goe_eigen_density,
    goe_expectation_boundary,
    goe_expectation_closed,
    goe_expectation_min_quadrature,
    goe_expectation_quadrature,
    goe_scaled_expectation,
    selberg_constant,
)


class TestSelbergConstant:
    def test_size_one_is_gaussian_normalizer(self):
        assert selberg_constant(1) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-15)

    def test_known_values(self):
        assert selberg_constant(2) == pytest.approx(2 * math.sqrt(math.pi), rel=1e-12)
        assert selberg_constant(3) == pytest.approx(math.sqrt(2) * math.pi, rel=1e-12)
        assert selberg_constant(4) == pytest.approx(2 * math.pi, rel=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_raw_chamber_quadrature(self, n):
        # tensor quadrature of the unnormalized product, no analytic shortcuts
        assert chamber_product_quadrature(n, p=96) == pytest.approx(
            selberg_constant(n), rel=1e-8
        )

    def test_rejects_out_of_range(self):
        for bad in (0, 9, -1):
            with pytest.raises(DomainError):
                selberg_constant(bad)
        with pytest.raises(DomainError):
            selberg_constant(2.5)


class TestEigenDensity:
    def test_single_eigenvalue_is_standard_normal(self):
        assert goe_eigen_density(1, [0.0]) == pytest.approx(
            1.0 / math.sqrt(2 * math.pi), rel=1e-15
        )

    def test_unordered_input_gives_zero(self):
        assert goe_eigen_density(2, [1.0, 0.0]) == 0.0

    def test_pair_value(self):
        # direct substitution: e^{-1/2} * 1 / c_2
        assert goe_eigen_density(2, [0.0, 1.0]) == pytest.approx(
            math.exp(-0.5) / (2 * math.sqrt(math.pi)), rel=1e-14
        )

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            goe_eigen_density(2, [0.0, 1.0, 2.0])

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_normalization(self, n):
        assert eigen_density_normalization(n) == pytest.approx(1.0, abs=1e-6)


class TestGoeQuery:
    def test_rejects_bad_n(self):
        for bad in (0, 4, -1):
            with pytest.raises(DomainError):
                GoeQuery(bad, 1.0, 0.0)

    def test_rejects_nonpositive_a(self):
        for bad in (0.0, -0.5):
            with pytest.raises(DomainError):
                GoeQuery(1, bad, 0.0)

    def test_sub_half_a_is_accepted(self):
        # the sphere parameterization needs a = 1/(1 + kappa1) in (1/2, 1)
        GoeQuery(2, 0.51, 0.0)


class TestClosedForms:
    def test_pair_at_unit_parameters(self):
        assert goe_expectation_closed(GoeQuery(1, 1.0, 0.0)) == pytest.approx(
            math.sqrt(6) / 4, rel=1e-15
        )

    def test_triple_at_unit_parameters(self):
        assert goe_expectation_closed(GoeQuery(2, 1.0, 0.0)) == pytest.approx(
            1 / math.sqrt(6), rel=1e-15
        )

    def test_quad_at_unit_parameters(self):
        # value implied by the expected-maxima constant for 3-d fields
        assert goe_expectation_closed(GoeQuery(3, 1.0, 0.0)) == pytest.approx(
            (29 * math.sqrt(6) - 36) / 144, rel=1e-14
        )

    @pytest.mark.parametrize("a", [0.6, 1.0, 2.0])
    @pytest.mark.parametrize("b", [-2.0, 0.0, 0.5])
    def test_closed_vs_oracle_small(self, a, b):
        for n, tol in ((1, 1e-8), (2, 1e-8)):
            q = GoeQuery(n, a, b)
            closed = goe_expectation_closed(q)
            oracle = goe_expectation_quadrature(q, tol)
            assert abs(closed - oracle) <= 1e-7 * abs(closed)

    @pytest.mark.parametrize("a,b", [(1.0, 0.0), (1.0, -1.0), (2.0, 1.0), (0.51, 2.0)])
    def test_closed_vs_oracle_quad(self, a, b):
        q = GoeQuery(3, a, b)
        closed = goe_expectation_closed(q)
        oracle = goe_expectation_quadrature(q, 1e-5)
        assert abs(closed - oracle) <= 1e-3 * abs(closed)


class TestQuadratureOracle:
    def test_matches_known_value(self):
        val = goe_expectation_quadrature(GoeQuery(1, 1.0, 0.0), 1e-8)
        assert val == pytest.approx(math.sqrt(6) / 4, rel=1e-8)

    def test_tol_domain(self):
        with pytest.raises(DomainError):
            goe_expectation_quadrature(GoeQuery(1, 1.0, 0.0), 1e-1)
        with pytest.raises(DomainError):
            goe_expectation_quadrature(GoeQuery(1, 1.0, 0.0), 1e-12)

    def test_convergence_error_reports_estimate(self, monkeypatch):
        import isopeak.goe as goe_module

        # starve the ladder so the tolerance is unreachable
        monkeypatch.setitem(goe_module._LADDER, 1, (8, 12))
        with pytest.raises(ConvergenceError) as excinfo:
            goe_expectation_quadrature(GoeQuery(1, 5.0, 0.5), 1e-9)
        assert excinfo.value.value is not None
        assert excinfo.value.error_estimate > 1e-9

    def test_spectrum_reflection_identity(self):
        # reflecting the spectrum sends the largest eigenvalue to minus the
        # smallest, so E[g(l_max; b)] must equal E[g(l_min; -b)]; the min-side
        # oracle integrates the chamber from the top with its own moment code.
        for n in (1, 2):
            for a, b in ((0.7, -1.0), (2.0, 0.5)):
                closed = goe_expectation_closed(GoeQuery(n, a, b))
                mirrored = goe_expectation_min_quadrature(GoeQuery(n, a, -b), 1e-8)
                assert abs(closed - mirrored) <= 1e-7 * abs(closed)

    def test_derivative_in_b_matches_oracle(self):
        # centered finite differences of both routes
        n, a, h = 1, 1.0, 1e-3
        for b in (-1.0, 0.0, 1.0):
            d_closed = (
                goe_expectation_closed(GoeQuery(n, a, b + h))
                - goe_expectation_closed(GoeQuery(n, a, b - h))
            ) / (2 * h)
            d_oracle = (
                goe_expectation_quadrature(GoeQuery(n, a, b + h), 1e-9)
                - goe_expectation_quadrature(GoeQuery(n, a, b - h), 1e-9)
            ) / (2 * h)
            assert d_oracle == pytest.approx(d_closed, rel=1e-4)


class TestBoundaryPath:
    def test_identity_away_from_boundary(self):
        # at kappa 0.5 the combination reduces to the plain closed form
        val = goe_expectation_boundary(1, 0.5, 0.0)
        direct = goe_expectation_closed(GoeQuery(1, 4.0 / 3.0, 0.0)) / math.sqrt(0.75)
        assert val == pytest.approx(direct, rel=1e-7)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_continuous_at_boundary(self, n):
        # closed form evaluated just inside kappa = 1 approaches the boundary value
        x = 1.3
        k = 1.0 - 1e-6
        a = 1.0 / ((1.0 - k) * (1.0 + k))
        inside = goe_expectation_closed(GoeQuery(n, a, k * x / math.sqrt(2))) / math.sqrt(
            1.0 - k * k
        )
        at_boundary = goe_expectation_boundary(n, 1.0, x)
        assert at_boundary == pytest.approx(inside, rel=2e-5)

    def test_boundary_regression_value(self):
        # first computed by this quadrature, then confirmed analytically:
        # at kappa=1, x=0 the outer Gaussian factors out as sqrt(pi) and the
        # chamber integral at 0 equals 1, so the value is sqrt(pi)/c_2 = 1/2.
        assert goe_expectation_boundary(1, 1.0, 0.0) == pytest.approx(0.5, rel=1e-10)

    def test_domain_checks(self):
        with pytest.raises(DomainError):
            goe_expectation_boundary(1, 0.0, 0.0)
        with pytest.raises(DomainError):
            goe_expectation_boundary(1, 1.2, 0.0)
        with pytest.raises(DomainError):
            goe_expectation_boundary(1, 0.5, math.inf)

    def test_scaled_expectation_rejects_bad_scale(self):
        with pytest.raises(DomainError):
            goe_scaled_expectation(1, 1.5, 0.0)


class TestDeterminism:
    def test_oracle_is_reproducible(self):
        q = GoeQuery(2, 1.3, -0.4)
        assert goe_expectation_quadrature(q, 1e-8) == goe_expectation_quadrature(q, 1e-8)
