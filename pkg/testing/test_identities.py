"""
Tests for the integral-representation catalog.
"""
import math

import pytest

import identities
from errors import DomainError
from models import IdentityCheckReport, OmegaParams, ParamPair

FAST_IDS = [i for i in identities.IDENTITY_IDS if not identities.CATALOG[i].nested]


class TestCatalog:
    """Test every identity on its default parameters."""

    @pytest.mark.parametrize('identity_id', FAST_IDS)
    def test_identity_holds(self, identity_id):
        """Test that both sides agree within the configured tolerance."""
        identity = identities.get_identity(identity_id)
        for pair in identity.default_params():
            report = identities.check_identity(identity_id, pair)
            assert report.passed, (identity_id, str(pair), report.max_rel_err, report.worst_point)

    @pytest.mark.slow
    def test_nested_identity(self):
        """Test the identity built on q(t) = int eta/s^3, which nests two quadratures."""
        report = identities.check_identity('R10', ParamPair(2.5, 0.5), grid=(0.5, 2.0, 8.0))
        assert report.passed, report.max_rel_err
        assert report.tolerance >= 1e-6

    @pytest.mark.slow
    @pytest.mark.parametrize('pair', identities.DEFAULT_PARAMS, ids=str)
    def test_nested_identity_on_acceptance_grid(self, pair):
        """Test R10 at t in (0.3, 1, 5, 20) for each default pair."""
        report = identities.check_identity('R10', pair, grid=identities.DEFAULT_GRID)
        assert report.passed, (str(pair), report.max_rel_err, report.worst_point)

    @pytest.mark.parametrize('pair', identities.DEFAULT_PARAMS, ids=str)
    def test_xi_eta_transforms_far_out(self, pair):
        """Test L[xi](20) and L[eta](20) against -Phi/t^2 and -Phi'/t^2 at 40 digits."""
        mpmath = pytest.importorskip('mpmath')
        mpmath.mp.dps = 40
        a, b = mpmath.mpf(pair.a), mpmath.mpf(pair.b)

        def big_phi(t):
            return (b - a) + (mpmath.exp(-b * t) - mpmath.exp(-a * t)) / (1 - mpmath.exp(-t))

        t = mpmath.mpf(20)
        expected = {'R4': -big_phi(t) / t ** 2, 'R5': -mpmath.diff(big_phi, t) / t ** 2}
        for identity_id, value in expected.items():
            report = identities.check_identity(identity_id, pair, grid=(20.0,))
            assert report.passed, (identity_id, str(pair), report.max_rel_err)
            assert report.points[0].rhs == pytest.approx(float(value), rel=1e-8), identity_id

    @pytest.mark.parametrize('identity_id', ['R4', 'R5', 'R6'])
    def test_kernel_identities_on_figure_pair(self, figure_pair, identity_id):
        """Test the xi, eta and Stieltjes identities for (1.7, 1.6)."""
        assert identities.check_identity(identity_id, figure_pair).passed

    @pytest.mark.parametrize('identity_id', ['R1', 'R4', 'R5', 'R6', 'R7'])
    def test_halved_tolerances_still_pass(self, quad_spec, identity_id):
        """Test that halving the quadrature tolerances keeps each side within the identity tolerance."""
        pair = ParamPair(3.2, 1.1)
        loose = identities.check_identity(identity_id, pair, spec=quad_spec)
        tight = identities.check_identity(identity_id, pair, spec=quad_spec.tightened())
        assert loose.passed and tight.passed
        for before, after in zip(loose.points, tight.points):
            assert after.rhs == pytest.approx(before.rhs, rel=loose.tolerance)

    def test_closed_form_pair(self, closed_form_pair):
        """Test R4 for (2, 1), where both sides equal (1 - e^-t)/t^2."""
        report = identities.check_identity('R4', closed_form_pair, grid=(0.5, 2.0))
        for point in report.points:
            expected = -math.expm1(-point.x) / point.x ** 2
            assert point.lhs == pytest.approx(expected, rel=1e-13)
            assert point.rhs == pytest.approx(expected, rel=1e-11)

    def test_check_catalog(self):
        """Test that check_catalog runs each id over the given pairs."""
        pairs = [ParamPair(2.5, 0.5), ParamPair(3.2, 1.1)]
        reports = identities.check_catalog(['R7', 'R14'], pairs, grid=(1.0, 4.0))
        assert [r.identity_id for r in reports] == ['R7', 'R7', 'R14', 'R14']
        assert all(r.passed for r in reports)

    def test_omega_params_accepted(self):
        """Test that a validated OmegaParams can be passed directly."""
        report = identities.check_identity('R1', OmegaParams.of(2.5, 0.5), grid=(1.0,))
        assert report.params == ParamPair(2.5, 0.5)


class TestDomainGates:
    """Test that identities refuse parameters outside their domain."""

    def test_outside_omega(self):
        """Test that a = 1.0 is refused by an Omega-only identity."""
        with pytest.raises(DomainError):
            identities.check_identity('R4', ParamPair(1.0, 0.5))

    def test_outside_omega_allowed_for_gamma_ratio(self):
        """Test that the Gamma-ratio representation accepts a <= 1."""
        assert identities.check_identity('R7', ParamPair(0.9, 0.4), grid=(1.0, 5.0)).passed

    def test_gap_above_one(self):
        """Test that R12 needs a - b > 1."""
        with pytest.raises(DomainError):
            identities.check_identity('R12', ParamPair(1.7, 1.6))

    def test_unknown_id(self, figure_pair):
        """Test that an unknown identity raises DomainError."""
        with pytest.raises(DomainError):
            identities.check_identity('R99', figure_pair)

    @pytest.mark.parametrize('grid', [(), (1.0, 0.0), (1.0, -2.0)])
    def test_bad_grid(self, grid):
        """Test that empty or non-positive grids raise DomainError."""
        with pytest.raises(DomainError):
            identities.check_identity('R7', ParamPair(2.5, 0.5), grid=grid)


class TestReports:
    """Test the report invariants."""

    def test_worst_point_is_on_grid(self):
        """Test that worst_point is one of the grid points and max_rel_err is the max."""
        grid = (0.3, 1.0, 5.0)
        report = identities.check_identity('R14', ParamPair(3.2, 1.1), grid=grid)
        assert report.worst_point in grid
        assert report.max_rel_err == max(p.rel_err for p in report.points)
        assert report.to_dict()['details']['grid'] == list(grid)

    def test_negative_tolerance_fails(self):
        """Test that passed follows the tolerance."""
        report = identities.check_identity('R7', ParamPair(2.5, 0.5), grid=(1.0,), tolerance=-1.0)
        assert not report.passed

    def test_inconsistent_report_rejected(self):
        """Test that passed must agree with max_rel_err <= tolerance."""
        with pytest.raises(ValueError):
            IdentityCheckReport('R1', ParamPair(2.0, 1.0), (1.0,), 1e-3, 1.0, True, 1e-8)

    def test_relative_error(self):
        """Test the symmetric relative error."""
        assert identities.relative_error(0.0, 0.0) == 0.0
        assert identities.relative_error(1.0, 1.1) == pytest.approx(0.1 / 1.1)
