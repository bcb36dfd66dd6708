import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats

from evalues.numerics import (
    QuadratureError,
    chi2_survival_even,
    integrate_unit_interval,
    lower_incomplete_gamma,
    regularized_lower_gamma,
    std_normal_cdf,
)

# Frozen from mpmath at 40 digits.
PHI_AT_MINUS_1_959964 = 0.02499999909644240430
GAMMA_HALF_AT_QUARTER = 0.92256201282558489751
FISHER_TWO_005 = 0.01747866136776995497  # chi-square(4) tail at -2 ln 0.0025


class TestStdNormalCdf:
    def test_anchors(self):
        assert std_normal_cdf(0.0) == 0.5
        assert std_normal_cdf(-1.959964) == pytest.approx(0.025, abs=1e-6)
        assert std_normal_cdf(-1.959964) == pytest.approx(PHI_AT_MINUS_1_959964, abs=1e-15)
        assert abs(std_normal_cdf(10.0) - 1.0) <= 1e-12

    @given(st.floats(-38, 38))
    def test_symmetry(self, x):
        assert abs(std_normal_cdf(x) + std_normal_cdf(-x) - 1.0) <= 1e-12

    @settings(max_examples=200)
    @given(st.floats(-30, 8))
    def test_against_mpmath(self, x):
        assert abs(std_normal_cdf(x) - float(mpmath.ncdf(x))) <= 1e-12

    def test_monotone_on_grid(self):
        xs = np.linspace(-12, 12, 5001)
        values = [std_normal_cdf(float(x)) for x in xs]
        assert all(a <= b for a, b in zip(values, values[1:]))

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            std_normal_cdf(math.nan)


class TestChi2SurvivalEven:
    def test_two_dof_is_exponential(self):
        for x in np.linspace(0, 200, 401):
            assert chi2_survival_even(2, float(x)) == math.exp(-float(x) / 2)

    def test_anchors(self):
        assert chi2_survival_even(2, 0.0) == 1.0
        assert chi2_survival_even(4, 0.0) == 1.0
        t = -2 * math.log(0.0025)
        assert chi2_survival_even(4, t) == pytest.approx(FISHER_TWO_005, abs=1e-15)

    @pytest.mark.parametrize("dof", [2, 4, 10, 40, 200, 2000])
    def test_against_scipy(self, dof):
        for x in [0.1, 1.0, dof / 2, dof, 2.0 * dof, 5.0 * dof + 50]:
            expected = stats.chi2.sf(x, dof)
            assert chi2_survival_even(dof, x) == pytest.approx(expected, rel=1e-10, abs=1e-300)

    def test_large_argument_log_space(self):
        # the Poisson terms underflow individually but the tail is representable
        x, dof = 1500.0, 1000
        assert chi2_survival_even(dof, x) == pytest.approx(stats.chi2.sf(x, dof), rel=1e-9)

    def test_monotone_in_x_and_dof(self):
        xs = np.linspace(0, 60, 241)
        for dof in range(2, 42, 2):
            row = [chi2_survival_even(dof, float(x)) for x in xs]
            assert all(a >= b for a, b in zip(row, row[1:]))
            nxt = [chi2_survival_even(dof + 2, float(x)) for x in xs]
            assert all(a <= b for a, b in zip(row, nxt))

    @pytest.mark.parametrize("dof", [0, -2, 3, 2.5])
    def test_rejects_bad_dof(self, dof):
        with pytest.raises(ValueError):
            chi2_survival_even(dof, 1.0)

    def test_rejects_negative_x(self):
        with pytest.raises(ValueError):
            chi2_survival_even(2, -1.0)


class TestLowerIncompleteGamma:
    @pytest.mark.parametrize("z", [0.0, 0.3, 1.0, 4.0, 30.0])
    def test_closed_forms(self, z):
        assert lower_incomplete_gamma(1.0, z) == pytest.approx(-math.expm1(-z), rel=1e-12, abs=1e-300)
        assert lower_incomplete_gamma(2.0, z) == pytest.approx(
            1 - (1 + z) * math.exp(-z), rel=1e-10, abs=1e-15)

    def test_quadrature_anchor(self):
        assert lower_incomplete_gamma(0.5, 0.25) == pytest.approx(GAMMA_HALF_AT_QUARTER, abs=1e-8)
        assert lower_incomplete_gamma(0.5, 0.25) == pytest.approx(GAMMA_HALF_AT_QUARTER, rel=1e-10)

    @settings(max_examples=200)
    @given(st.floats(0.05, 60), st.floats(0.0, 200))
    def test_against_mpmath(self, a, z):
        expected = float(mpmath.gammainc(a, 0, z))
        assert lower_incomplete_gamma(a, z) == pytest.approx(expected, rel=1e-10, abs=1e-300)

    # for a much below 1/2 the upper tail at z = 50a is still well above 1e-8
    @pytest.mark.parametrize("a", [0.5, 1.0, 2.5, 7.0, 20.0])
    def test_tends_to_gamma(self, a):
        assert lower_incomplete_gamma(a, 50 * a) == pytest.approx(math.gamma(a), abs=1e-8)

    def test_regularized_matches_scipy(self):
        for a in (0.3, 1.5, 9.0):
            for z in (0.2, 3.0, 25.0):
                assert regularized_lower_gamma(a, z) == pytest.approx(special.gammainc(a, z), rel=1e-10)

    @pytest.mark.parametrize("a,z", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.5)])
    def test_rejects_bad_arguments(self, a, z):
        with pytest.raises(ValueError):
            lower_incomplete_gamma(a, z)


class TestIntegrateUnitInterval:
    def test_constants(self):
        value, err = integrate_unit_interval(lambda p: 1.0, 1e-9)
        assert value == pytest.approx(1.0, abs=1e-9) and err <= 1e-9
        value, _ = integrate_unit_interval(lambda p: 2.0, 1e-9)
        assert value == pytest.approx(2.0, abs=1e-9)

    @pytest.mark.parametrize("kappa", [0.05, 0.1, 0.5, 0.9])
    def test_power_singularity(self, kappa):
        value, err = integrate_unit_interval(lambda p: kappa * p ** (kappa - 1), 1e-9)
        assert abs(value - 1.0) <= 1e-9
        assert err <= 1e-9

    def test_step_function(self):
        value, _ = integrate_unit_interval(lambda p: 10.0 if p <= 0.1 else 0.0, 1e-9)
        assert value == pytest.approx(1.0, abs=1e-8)

    def test_log_singularity(self):
        value, _ = integrate_unit_interval(lambda p: -math.log(p) if p > 0 else math.inf, 1e-9)
        assert value == pytest.approx(1.0, abs=1e-9)

    def test_non_integrable_is_reported(self):
        with pytest.raises(QuadratureError):
            integrate_unit_interval(lambda p: 1.0 / p if p > 0 else math.inf, 1e-9)
