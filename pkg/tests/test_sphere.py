"""Sphere peak-statistics tests.

Oracles: the GOE quadrature engine through the exponential-moment ratio, the
Euclidean module in the kappa1 -> 0 limit, and normalization integrals.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from isopeak import DomainError
from isopeak import euclid
from isopeak.goe import (
    GoeQuery,
    goe_expectation_closed,
    goe_expectation_quadrature,
    goe_scaled_expectation,
)
from isopeak.sphere import (
    SphereModel,
    exceedance_curve,
    expected_maxima,
    expected_maxima_above,
    height_density,
    height_exceedance,
)

PHI = lambda x: math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)


class TestModel:
    def test_kappas_from_derivatives(self):
        m = SphereModel(1, 2.0, 4.0)
        assert m.kappa1 == pytest.approx(0.5)
        assert m.kappa2 == pytest.approx(1.0)

    def test_kappa_coupling(self):
        # kappa2 = C' * kappa1 always
        m = SphereModel(2, 1.7, 0.9)
        assert m.kappa2 == pytest.approx(m.c1 * m.kappa1, rel=1e-14)

    def test_from_kappas_round_trip(self):
        m = SphereModel.from_kappas(3, 0.7, 1.3)
        assert m.kappa1 == pytest.approx(0.7, rel=1e-14)
        assert m.kappa2 == pytest.approx(1.3, rel=1e-14)

    def test_validation(self):
        with pytest.raises(DomainError):
            SphereModel(1, -1.0, 1.0)
        with pytest.raises(DomainError):
            SphereModel(1, 1.0, 0.0)
        with pytest.raises(DomainError):
            SphereModel.from_kappas(1, 0.0, 1.0)

    @pytest.mark.parametrize(
        "dim,k1,k2,expected",
        [
            (1, 1.0, 2.0, "proved"),        # difference exactly 1
            (1, 0.1, 0.1, "proved"),
            (1, 1.0, 3.5, "conjectured"),   # 2.5 < 3
            (1, 1.0, 4.1, "invalid"),
            (2, 1.0, 2.8, "conjectured"),   # 1.8 < 2
            (2, 1.0, 3.1, "invalid"),
            (3, 1.0, 2.5, "conjectured"),   # 1.5 < 5/3
            (3, 1.0, 2.7, "invalid"),
        ],
    )
    def test_classification(self, dim, k1, k2, expected):
        assert SphereModel.from_kappas(dim, k1, k2).validity == expected

    def test_invalid_raises_with_bound(self):
        m = SphereModel.from_kappas(1, 1.0, 4.5)
        with pytest.raises(DomainError, match="kappa2 - kappa1 < 3"):
            height_density(m, 0.0)


class TestExpectedMaxima:
    def test_circle_value(self):
        assert expected_maxima(SphereModel.from_kappas(1, 1.0, 1.0)) == pytest.approx(
            1 / math.pi, rel=1e-13
        )

    def test_s2_value(self):
        assert expected_maxima(SphereModel.from_kappas(2, 1.0, 1.0)) == pytest.approx(
            1 / (2 * math.pi), rel=1e-13
        )

    @pytest.mark.parametrize("dim", [1, 2, 3])
    @pytest.mark.parametrize("k1", [0.3, 1.0, 2.5])
    def test_matches_goe_prefactor_form(self, dim, k1):
        # sqrt(2) pi^{-(N+1)/2} k1^{-N/2} (1+k1)^{-1/2} Gamma((N+1)/2) E(N, 1/(1+k1), 0)
        m = SphereModel.from_kappas(dim, k1, k1)
        expect = (
            math.sqrt(2)
            / (math.pi ** ((dim + 1) / 2) * k1 ** (dim / 2) * math.sqrt(1 + k1))
            * math.gamma((dim + 1) / 2)
            * goe_expectation_closed(GoeQuery(dim, 1.0 / (1.0 + k1), 0.0))
        )
        assert expected_maxima(m) == pytest.approx(expect, rel=1e-12)

    def test_count_depends_on_kappa1_only(self):
        a = SphereModel.from_kappas(2, 0.8, 0.5)
        b = SphereModel.from_kappas(2, 0.8, 1.7)
        assert expected_maxima(a) == pytest.approx(expected_maxima(b), rel=1e-14)


class TestHeightDensity:
    @pytest.mark.parametrize("dim", [1, 2, 3])
    @pytest.mark.parametrize("k1,k2", [(0.1, 0.1), (1.0, 1.0), (1.0, 2.0)])
    def test_normalization(self, dim, k1, k2):
        m = SphereModel.from_kappas(dim, k1, k2)
        val, _ = quad(lambda t: height_density(m, t), -12, 12, epsabs=1e-9, limit=300)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_small_kappa2_limit_is_standard_normal(self):
        # the deviation vanishes like sqrt(kappa2): the odd term carries
        # sqrt(2 pi kappa2) x phi(x), about 3e-5 at kappa2 = 1e-8
        xs = np.linspace(-4, 4, 30)
        phi = np.exp(-xs * xs / 2) / math.sqrt(2 * math.pi)
        np.testing.assert_allclose(
            height_density(SphereModel.from_kappas(1, 0.5, 1e-8), xs), phi, atol=5e-5
        )
        np.testing.assert_allclose(
            height_density(SphereModel.from_kappas(1, 0.5, 1e-14), xs), phi, atol=5e-8
        )

    @pytest.mark.parametrize("dim", [1, 2, 3])
    @pytest.mark.parametrize("kappa", [0.3, 1.0])
    def test_euclidean_correspondence(self, dim, kappa):
        # kappa1 -> 0 at kappa2 = kappa^2 reduces to the Euclidean density
        ms = SphereModel.from_kappas(dim, 1e-10, kappa * kappa)
        me = euclid.EuclideanModel.from_kappa(dim, kappa)
        for x in (-1.0, 0.0, 2.0):
            assert height_density(ms, x) == pytest.approx(
                euclid.height_density(me, x), abs=1e-9
            )

    @pytest.mark.parametrize("dim,tol", [(1, 1e-6), (2, 1e-6), (3, 1e-3)])
    def test_ratio_consistency_with_goe_quadrature(self, dim, tol):
        # Eq-ratio route: sqrt(1+k1) * scaled-expectation / E(N, 1/(1+k1), 0)
        for k1, k2 in ((1.0, 2.0), (1.0, 1.0), (0.5, 0.8)):
            m = SphereModel.from_kappas(dim, k1, k2)
            den = goe_expectation_quadrature(
                GoeQuery(dim, 1.0 / (1.0 + k1), 0.0), 1e-8 if dim < 3 else 1e-5
            )
            scale = math.sqrt(1.0 + k1 - k2)
            for x in (-1.0, 0.0, 2.0):
                num = math.sqrt(1.0 + k1) * goe_scaled_expectation(
                    dim, scale, math.sqrt(k2) * x / math.sqrt(2.0)
                )
                assert height_density(m, x) == pytest.approx(PHI(x) * num / den, rel=tol)

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_continuity_across_proved_boundary(self, dim):
        # kappa2 - kappa1 = 1 is the proved edge; h is continuous across it
        k1 = 1.0
        at = SphereModel.from_kappas(dim, k1, k1 + 1.0)
        near = SphereModel.from_kappas(dim, k1, k1 + 1.0 - 1e-7)
        beyond = SphereModel.from_kappas(dim, k1, k1 + 1.0 + 1e-7)
        for x in (-1.0, 0.0, 2.0):
            assert abs(height_density(at, x) - height_density(near, x)) <= 1e-5
            assert abs(height_density(at, x) - height_density(beyond, x)) <= 1e-5

    def test_nonnegative(self):
        xs = np.arange(-12.0, 12.0, 0.01)
        for dim in (1, 2, 3):
            for k1, k2 in ((0.1, 0.1), (1.0, 1.0), (1.0, 2.0)):
                m = SphereModel.from_kappas(dim, k1, k2)
                assert np.all(height_density(m, xs) >= -1e-12)


class TestExceedance:
    def test_limits(self):
        m = SphereModel.from_kappas(2, 1.0, 2.0)
        assert height_exceedance(m, -math.inf) == pytest.approx(1.0, abs=1e-9)
        assert height_exceedance(m, math.inf) == 0.0

    def test_degenerate_median(self):
        # sqrt(kappa2) convergence again: ~0.25 sqrt(kappa2) at the median
        m = SphereModel.from_kappas(1, 1e-12, 1e-12)
        assert height_exceedance(m, 0.0) == pytest.approx(0.5, abs=1e-6)

    def test_composition(self):
        m = SphereModel.from_kappas(1, 1.0, 1.0)
        total = expected_maxima(m)
        assert expected_maxima_above(m, -math.inf) == pytest.approx(total, rel=1e-9)
        assert expected_maxima_above(m, math.inf) == 0.0
        f1 = height_exceedance(m, 1.0)
        assert expected_maxima_above(m, 1.0) == pytest.approx(total * f1, rel=1e-12)

    def test_curve_matches_pointwise(self):
        m = SphereModel.from_kappas(1, 1.0, 2.0)
        xs = np.linspace(-3, 3, 25)
        curve = exceedance_curve(m, xs)
        for x, v in zip(xs[::6], curve[::6]):
            assert v == pytest.approx(height_exceedance(m, float(x)), abs=1e-9)
