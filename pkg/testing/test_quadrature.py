"""
Tests for the QUADPACK driver, Laplace transforms and algebraic
(Stieltjes-type) integrals.
"""
import math

import numpy as np
import pytest

import kernels
from errors import DomainError, QuadratureError, UndeclaredGrowthError
from models import Breakpoints, Growth, GrowthClass, ParamPair, QuadratureSpec, ScalarFunction
from quadrature import (algebraic_integral, algebraic_tail, integrate, laplace, laplace_with_error,
                        periodic_tail, stieltjes_integral, stieltjes_integral_with_error)


def handle(func, growth, label='f'):
    return ScalarFunction(func, label=label, growth=growth, vectorized=True)


class TestQuadpackDriver:
    """Test single QUADPACK calls through integrate."""

    def test_exact_for_polynomials(self, quad_spec):
        """Test that a degree-19 polynomial is integrated in one interval."""
        result = integrate(lambda t: t ** 19, 0.0, 1.0, quad_spec)
        assert result.value == pytest.approx(1.0 / 20.0, rel=1e-14)
        assert result.error < 1e-12
        assert result.panels == 1

    def test_non_finite_integrand(self, quad_spec):
        """Test that a NaN integrand raises QuadratureError."""
        with pytest.raises(QuadratureError):
            integrate(lambda t: np.full_like(t, np.nan), 0.0, 1.0, quad_spec)

    def test_zero_width(self, quad_spec):
        """Test that an empty range gives zero without evaluating."""
        result = integrate(lambda t: np.full_like(t, np.nan), 2.0, 2.0, quad_spec)
        assert result.value == 0.0
        assert result.panels == 0


class TestFiniteIntegrals:
    """Test integrate over finite ranges."""

    def test_smooth(self, quad_spec):
        """Test int_0^pi sin = 2."""
        result = integrate(np.sin, 0.0, math.pi, quad_spec)
        assert result.value == pytest.approx(2.0, rel=1e-13)
        assert result.error < 1e-11

    def test_power_singularity(self, quad_spec):
        """Test int_0^1 t^-0.9 dt = 10 via the power substitution."""
        result = integrate(lambda t: t ** -0.9, 0.0, 1.0, quad_spec, singular_exponent=0.1)
        assert result.value == pytest.approx(10.0, rel=1e-12)

    def test_kink_at_breakpoint(self, quad_spec):
        """Test that a declared breakpoint makes |t - 1/3| exact."""
        spec = quad_spec.with_breakpoints(Breakpoints([1.0 / 3.0]))
        result = integrate(lambda t: np.abs(t - 1.0 / 3.0), 0.0, 1.0, spec)
        assert result.value == pytest.approx(5.0 / 18.0, rel=1e-14)
        assert result.panels == 2

    def test_subdivision_limit(self):
        """Test that an exhausted subdivision budget raises QuadratureError."""
        spec = QuadratureSpec(abs_tol=1e-15, rel_tol=1e-14, max_subdivisions=2)
        with pytest.raises(QuadratureError) as info:
            integrate(lambda t: np.sqrt(np.abs(t - 0.3)), 0.0, 1.0, spec)
        assert math.isfinite(info.value.estimate)

    def test_limits_out_of_order(self, quad_spec):
        """Test that lower > upper raises DomainError."""
        with pytest.raises(DomainError):
            integrate(np.sin, 1.0, 0.0, quad_spec)


class TestLaplace:
    """Test Laplace transforms with declared growth."""

    def test_constant(self, quad_spec):
        """Test L[1](2) = 1/2."""
        f = handle(lambda t: np.ones_like(t), GrowthClass.constant(1.0))
        assert laplace(f, 2.0, quad_spec) == pytest.approx(0.5, rel=1e-13)

    def test_xi_of_closed_form_pair(self, closed_form_pair, quad_spec):
        """Test L[min(t, 1)](1) = 1 - 1/e."""
        spec = quad_spec.with_breakpoints(Breakpoints.for_pair(closed_form_pair, 200.0))
        value = laplace(kernels.xi_function(closed_form_pair), 1.0, spec)
        assert value == pytest.approx(1.0 - math.exp(-1.0), rel=1e-12)

    def test_eta_of_closed_form_pair(self, closed_form_pair, quad_spec):
        """Test L[max(0, t - 1)](1) = 1/e."""
        spec = quad_spec.with_breakpoints(Breakpoints.for_pair(closed_form_pair, 200.0))
        value = laplace(kernels.eta_function(closed_form_pair), 1.0, spec)
        assert value == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_power_growth(self, quad_spec):
        """Test L[t^-1/2](2) = sqrt(pi/2)."""
        f = handle(lambda t: t ** -0.5, GrowthClass.power(1.0, 0.5))
        assert laplace(f, 2.0, quad_spec) == pytest.approx(math.sqrt(math.pi / 2.0), rel=1e-12)

    def test_linear_growth_small_x(self, quad_spec):
        """Test L[t](0.05) = 400, which needs a long range."""
        f = handle(lambda t: t, GrowthClass.linear(1.0))
        result = laplace_with_error(f, 0.05, quad_spec)
        assert result.value == pytest.approx(400.0, rel=1e-12)
        assert result.upper >= 800.0

    def test_undeclared_growth(self, quad_spec):
        """Test that an integrand without growth is refused."""
        f = ScalarFunction(lambda t: t, label='bare', vectorized=True)
        with pytest.raises(UndeclaredGrowthError):
            laplace(f, 1.0, quad_spec)

    def test_linearity(self, figure_pair, quad_spec):
        """Test L[2 xi - 3 eta] = 2 L[xi] - 3 L[eta]."""
        spec = quad_spec.with_breakpoints(Breakpoints.for_pair(figure_pair, 400.0))
        xi_f, eta_f = kernels.xi_function(figure_pair), kernels.eta_function(figure_pair)
        combined = handle(lambda t: 2.0 * xi_f(t) - 3.0 * eta_f(t),
                          GrowthClass.linear(2.0 * xi_f.growth.bound + 3.0 * eta_f.growth.bound))
        for x in (0.3, 1.0, 5.0):
            expected = 2.0 * laplace(xi_f, x, spec) - 3.0 * laplace(eta_f, x, spec)
            assert laplace(combined, x, spec) == pytest.approx(expected, rel=1e-10)

    def test_tightened_tolerances(self, figure_pair, quad_spec):
        """Test that halving the tolerances moves L[eta] by less than the looser tolerance."""
        spec = quad_spec.with_breakpoints(Breakpoints.for_pair(figure_pair, 400.0))
        tight = spec.tightened()
        assert tight.rel_tol == 0.5 * spec.rel_tol
        for x in (0.3, 1.0, 20.0):
            loose = laplace(kernels.eta_function(figure_pair), x, spec)
            assert laplace(kernels.eta_function(figure_pair), x, tight) == pytest.approx(loose, rel=spec.rel_tol * 10)

    def test_relative_target_far_out(self, figure_pair, quad_spec):
        """Test that a transform of size e^-32 keeps its relative accuracy."""
        spec = quad_spec.with_breakpoints(Breakpoints.for_pair(figure_pair, 20.0))
        result = laplace_with_error(kernels.eta_function(figure_pair), 20.0, spec)
        assert 0.0 < result.value < 1e-14
        assert result.error <= quad_spec.rel_tol * result.value

    @pytest.mark.parametrize('x', [0.0, -1.0])
    def test_x_must_be_positive(self, quad_spec, x):
        """Test that x <= 0 raises DomainError."""
        f = handle(lambda t: np.ones_like(t), GrowthClass.constant(1.0))
        with pytest.raises(DomainError):
            laplace(f, x, quad_spec)


class TestStieltjes:
    """Test algebraic kernels with analytic tails."""

    def test_constant_density(self, quad_spec):
        """Test int_0^inf (x + t)^-2 dt = 1/x."""
        f = handle(lambda t: np.ones_like(t), GrowthClass.constant(1.0))
        assert stieltjes_integral(f, 2.0, 0.5, quad_spec) == pytest.approx(2.0, rel=1e-12)

    @pytest.mark.parametrize('x', [0.5, 1.0, 5.0])
    def test_closed_form_eta(self, closed_form_pair, quad_spec, x):
        """Test 2 int eta(t)/(x + t)^3 dt = 1/(x + 1) for (2, 1)."""
        spec = quad_spec.with_breakpoints(Breakpoints.for_pair(closed_form_pair, 10.0))
        value = 2.0 * stieltjes_integral(kernels.eta_function(closed_form_pair), 3.0, x, spec)
        assert value == pytest.approx(1.0 / (x + 1.0), rel=1e-10)

    def test_oscillating_density_error_estimate(self, figure_pair, quad_spec):
        """Test eta without breakpoints: the periodic tail leaves one kink to the adaptive rule."""
        result = stieltjes_integral_with_error(kernels.eta_function(figure_pair), 3.0, 1.0, quad_spec)
        assert math.isfinite(result.value)
        assert 0.0 <= result.error < 1e-10 * abs(result.value)

    def test_trend_tail(self):
        """Test the analytic tail of a pure linear trend."""
        growth = GrowthClass.linear(1.0, slope=1.0, intercept=0.0, deviation=0.0)
        value, residual = algebraic_tail(growth, 3.0, 0.0, 100.0)
        assert value == pytest.approx(0.01, rel=1e-14)
        assert residual == 0.0

    def test_order_too_small(self, quad_spec):
        """Test that rho <= 2 is refused for linear growth."""
        with pytest.raises(DomainError):
            stieltjes_integral(kernels.eta_function(ParamPair(2.0, 1.0)), 2.0, 1.0, quad_spec)


class TestAlgebraicTails:
    """Test the folded periodic tail and the truncated trend tail."""

    def test_periodic_tail_of_linear_density(self, quad_spec):
        """Test int_s^inf t (x + t)^-3 dt = 1/(x + s) - x/(2 (x + s)^2) with increment 1."""
        growth = GrowthClass.linear(1.0, slope=1.0, period=1.0, periodic_from=0.0,
                                    increment=lambda t: np.ones_like(t))
        f = handle(lambda t: t, growth, 't')
        for x, start in ((0.5, 0.0), (2.0, 3.5), (10.0, 100.0)):
            expected = 1.0 / (x + start) - x / (2.0 * (x + start) ** 2)
            assert periodic_tail(f, 3.0, x, start, quad_spec).value == pytest.approx(expected, rel=1e-12)

    def test_periodic_tail_needs_declared_regime(self, quad_spec):
        """Test that a start before the periodic regime raises DomainError."""
        growth = GrowthClass(Growth.BOUNDED, 1.0, period=1.0, periodic_from=2.0)
        f = handle(lambda t: np.ones_like(t), growth)
        with pytest.raises(DomainError):
            periodic_tail(f, 2.0, 1.0, 1.0, quad_spec)

    def test_increment_needs_rho_above_two(self, closed_form_pair, quad_spec):
        """Test that a growing periodic continuation needs rho > 2."""
        with pytest.raises(DomainError):
            periodic_tail(kernels.eta_function(closed_form_pair), 2.0, 1.0, 1.0, quad_spec)

    def test_truncated_tail_within_target(self, quad_spec):
        """Test int_0^inf (1 + t)^-6 dt = 1/5 through the truncated range."""
        f = handle(lambda t: (1.0 + t) ** -2, GrowthClass.bounded(1.0))
        result = algebraic_integral(f, 4.0, 1.0, 0.0, quad_spec)
        assert result.value == pytest.approx(0.2, rel=1e-12)
        assert result.upper == quad_spec.truncation.stieltjes_upper

    def test_truncated_tail_above_target(self, quad_spec):
        """Test that a residual beyond the cut larger than the tolerance raises."""
        f = handle(lambda t: (1.0 + t) ** -2, GrowthClass.bounded(1.0))
        with pytest.raises(QuadratureError) as info:
            algebraic_integral(f, 1.5, 1.0, 0.0, quad_spec)
        assert math.isfinite(info.value.estimate)
