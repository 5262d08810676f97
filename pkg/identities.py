"""
Catalog of integral-representation identities.

Each identity is checked by evaluating its two sides independently (a
closed form from special functions against a quadrature of a kernel) at
every grid point and recording the worst relative disagreement.
"""
import math
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

import config
import families
import kernels
from errors import DomainError
from models import (ParamPair, Breakpoints, GrowthClass, IdentityCheckReport, IdentityPoint,
                    QuadratureSpec, ScalarFunction, as_pair, require_finite)
from quadrature import laplace, stieltjes_integral, integrate
from special_core import gamma, lower_incomplete_gamma, log_gamma_ratio

logger = logging.getLogger(__name__)

DEFAULT_GRID = (0.3, 1.0, 5.0, 20.0)
DEFAULT_PARAMS = (ParamPair(1.7, 1.6), ParamPair(2.5, 0.5), ParamPair(3.2, 1.1))
GAP_ABOVE_ONE_PARAMS = (ParamPair(2.5, 0.5), ParamPair(3.2, 1.1), ParamPair(3.5, 1.0))

Side = Callable[[ParamPair, float, QuadratureSpec], float]


@dataclass(frozen=True)
class Identity:
    """One catalog entry: two evaluation paths that must agree."""
    identity_id: str
    description: str
    lhs: Side
    rhs: Side
    requires_omega: bool = True
    needs_gap_above_one: bool = False
    # integrand has kinks at k+a, k+b: 'laplace' or 'stieltjes' range
    kinks: Optional[str] = None
    nested: bool = False

    def check_domain(self, pair: ParamPair):
        if self.requires_omega and not pair.in_omega:
            raise DomainError(f"{self.identity_id}: params {pair} outside Omega (a must exceed 1)")
        if self.needs_gap_above_one and not pair.lam > 1:
            raise DomainError(f"{self.identity_id}: needs a - b > 1, got {pair}")

    def default_params(self) -> Tuple[ParamPair, ...]:
        return GAP_ABOVE_ONE_PARAMS if self.needs_gap_above_one else DEFAULT_PARAMS


# ============================================================================
# INTEGRAND HANDLES
# ============================================================================

def _kernel(func, pair: ParamPair, label: str, growth: GrowthClass) -> ScalarFunction:
    return ScalarFunction(lambda t: func(pair, t), label=f"{label}[{pair}]",
                          growth=growth, vectorized=True)


def _phi_bound(pair: ParamPair) -> float:
    # |Phi'| <= C since -Phi'(t) = t^2 L[eta](t) and eta(s) <= C s
    return kernels.eta_growth_constant(pair)


def _power_weighted(pair: ParamPair, label: str, inner, bound: float) -> ScalarFunction:
    """t^(a-b-1) * inner(t), declared as power growth of exponent a-b."""
    lam = pair.lam
    return ScalarFunction(lambda t: np.power(t, lam - 1.0) * inner(t), label=f"{label}[{pair}]",
                          growth=GrowthClass.power(bound, lam), vectorized=True)


def _with_kinks(spec: QuadratureSpec, pair: ParamPair, upper: float) -> QuadratureSpec:
    return spec.with_breakpoints(Breakpoints.for_pair(pair, upper))


# ============================================================================
# SIDES
# ============================================================================

def _r1_rhs(pair, x, spec):
    return laplace(_kernel(kernels.phi, pair, 'Phi', GrowthClass.bounded(pair.lam)), x, spec)


def _r2_rhs(pair, x, spec):
    handle = _kernel(kernels.phi_prime, pair, "Phi'", GrowthClass.bounded(_phi_bound(pair)))
    return laplace(handle, x, spec)


def _r3_rhs(pair, x, spec):
    handle = _kernel(lambda p, u: kernels.phi(p, u) / u, pair, 'Phi/u',
                     GrowthClass.bounded(_phi_bound(pair)))
    return laplace(handle, x, spec)


def _r4_lhs(pair, t, spec):
    return -kernels.phi(pair, t) / (t * t)


def _r5_lhs(pair, t, spec):
    return -kernels.phi_prime(pair, t) / (t * t)


def _r7_rhs(pair, x, spec):
    handle = _power_weighted(pair, 't^(l-1)w', lambda t: kernels.w_kernel(pair, t), 1.0)
    return laplace(handle, x, spec) / gamma(pair.lam)


def _r8_rhs(pair, x, spec):
    handle = _power_weighted(pair, 't^(l-1)(1-w)', lambda t: kernels.one_minus_w(pair, t), 1.0)
    return x ** (pair.lam + 1.0) * laplace(handle, x, spec) / gamma(pair.lam)


def _r9_rhs(pair, x, spec):
    # e^(bt) w'(t) has at most linear growth, so the integral is a
    # Laplace transform at rate b
    lam, b = pair.lam, pair.b

    def integrand(t):
        scaled = kernels.w_prime(pair, t) * math.exp(b * t)
        return lower_incomplete_gamma(lam, x * t) * scaled

    bound = gamma(lam) * (abs(lam - 1.0) / 2.0 + b)
    handle = ScalarFunction(integrand, label=f"gamma(l,xt)w'e^bt[{pair}]",
                            growth=GrowthClass.linear(bound))
    return -laplace(handle, b, spec) / gamma(lam)


def _r10_rhs(pair, x, spec):
    q_inf = kernels.q_infinity(pair, spec)
    handle = ScalarFunction(lambda v: kernels.q_of_t(pair, v, spec) * v * v,
                            label=f"q(v)v^2[{pair}]", growth=GrowthClass.power(q_inf, 3.0),
                            vectorized=True)
    return 2.0 * q_inf - x ** 3 * laplace(handle, x, spec)


def _r11_rhs(pair, x, spec):
    lam, b = pair.lam, pair.b

    def integrand(t):
        return np.exp(-b * t + (lam - 1.0) * np.log(-np.expm1(-t)))

    return integrate(integrand, 0.0, x, spec, singular_exponent=lam).value


def _r12_lhs(pair, x, spec):
    return gamma(pair.lam) * families.L_deriv(pair, x) * x ** (1.0 - pair.lam)


def _r12_rhs(pair, x, spec):
    b, lam = pair.b, pair.lam
    # sup_t t|w'(t)| <= ((lam-1)/2 + b) sup_t t e^(-bt)
    bound = 1.0 + ((lam - 1.0) / 2.0 + b) / (math.e * b)

    def inner(t):
        return kernels.one_minus_w(pair, t) + t * kernels.w_prime(pair, t)

    return x * laplace(_power_weighted(pair, "t^(l-1)(1-w+tw')", inner, bound), x, spec)


def _r13_rhs(pair, x, spec):
    handle = _power_weighted(pair, 't^(l-1)p', lambda t: kernels.p_of_t(pair, t),
                             1.0 / gamma(pair.lam))
    return 1.0 - x ** pair.lam * laplace(handle, x, spec)


def _r14_rhs(pair, x, spec):
    handle = _kernel(kernels.varphi, pair, 'varphi', GrowthClass.bounded(max(pair.lam, 1.0)))
    return laplace(handle, x, spec)


def _r15_rhs(pair, x, spec):
    floor = pair.lam_floor
    handle = ScalarFunction(lambda t: np.power(t, floor) * kernels.W_kernel(pair, t),
                            label=f"t^[l]W[{pair}]", growth=GrowthClass.power(1.0, pair.lam),
                            vectorized=True)
    return laplace(handle, x, spec) / gamma(pair.lam)


def _gamma_ratio(pair, x, spec):
    return math.exp(log_gamma_ratio(x, pair.b, pair.a))


CATALOG: Dict[str, Identity] = {entry.identity_id: entry for entry in (
    Identity('R1', "-(log M)'(x) = L[Phi](x)",
             lambda p, x, s: -families.log_M_deriv(p, x), _r1_rhs),
    Identity('R2', "-x(log M)'(x) = L[Phi'](x)",
             lambda p, x, s: -x * families.log_M_deriv(p, x), _r2_rhs),
    Identity('R3', "log M(x) = L[Phi(u)/u](x)",
             lambda p, x, s: families.log_M(p, x), _r3_rhs),
    Identity('R4', "-Phi(t)/t^2 = L[xi](t)",
             _r4_lhs, lambda p, t, s: laplace(kernels.xi_function(p), t, s), kinks='laplace'),
    Identity('R5', "-Phi'(t)/t^2 = L[eta](t)",
             _r5_lhs, lambda p, t, s: laplace(kernels.eta_function(p), t, s), kinks='laplace'),
    Identity('R6', "x(log M)'(x) = 2 int eta(t)/(x+t)^3 dt",
             lambda p, x, s: x * families.log_M_deriv(p, x),
             lambda p, x, s: 2.0 * stieltjes_integral(kernels.eta_function(p), 3.0, x, s),
             kinks='stieltjes'),
    Identity('R7', "Gamma(x+b)/Gamma(x+a) = L[t^(l-1)w](x)/Gamma(l)",
             _gamma_ratio, _r7_rhs, requires_omega=False),
    Identity('R8', "L(x) = x^(l+1) L[t^(l-1)(1-w)](x)/Gamma(l)",
             lambda p, x, s: families.L(p, x), _r8_rhs, requires_omega=False),
    Identity('R9', "M(x) = -int gamma(l,xt) w'(t) dt/Gamma(l)",
             lambda p, x, s: families.M(p, x), _r9_rhs, requires_omega=False),
    Identity('R10', "-Phi(x) = 2q(inf) - x^3 L[q(v)v^2](x)",
             lambda p, x, s: -kernels.phi(p, x), _r10_rhs, kinks='laplace', nested=True),
    Identity('R11', "incomplete Beta form = int_0^x e^(-bt)(1-e^-t)^(l-1) dt",
             lambda p, x, s: families.beta_bernstein(p, x), _r11_rhs, requires_omega=False),
    Identity('R12', "Gamma(l)L'(x)x^(1-l) = x L[t^(l-1)(1-w+tw')](x)",
             _r12_lhs, _r12_rhs, requires_omega=False, needs_gap_above_one=True),
    Identity('R13', "M(x) = 1 - x^l L[p(t)t^(l-1)](x)",
             lambda p, x, s: families.M(p, x), _r13_rhs, requires_omega=False),
    Identity('R14', "psi(x+a) - psi(x+b) = L[varphi](x)",
             lambda p, x, s: families.digamma_gap(p, x), _r14_rhs, requires_omega=False),
    Identity('R15', "Gamma(x+b)/Gamma(x+a) = L[t^[l]W](x)/Gamma(l)",
             _gamma_ratio, _r15_rhs, requires_omega=False),
)}

IDENTITY_IDS = tuple(CATALOG)


def get_identity(identity_id: str) -> Identity:
    try:
        return CATALOG[identity_id]
    except KeyError:
        raise DomainError(f"unknown identity {identity_id!r}; choose from {', '.join(IDENTITY_IDS)}")


def _spec_for(identity: Identity, pair: ParamPair, x: float, spec: QuadratureSpec) -> QuadratureSpec:
    if identity.kinks == 'stieltjes':
        # beyond a-1 eta repeats, and one period of it is folded into the tail
        return _with_kinks(spec, pair, pair.a + 2.0)
    if identity.kinks == 'laplace':
        upper = min(4.0 * spec.truncation.initial_upper(x), spec.truncation.max_upper)
        return _with_kinks(spec, pair, upper)
    return spec


def relative_error(lhs: float, rhs: float) -> float:
    scale = max(abs(lhs), abs(rhs))
    if scale == 0.0:
        return 0.0
    return abs(lhs - rhs) / scale


def check_identity(identity_id: str, params, grid: Sequence[float] = DEFAULT_GRID,
                   spec: Optional[QuadratureSpec] = None,
                   tolerance: Optional[float] = None) -> IdentityCheckReport:
    """
    Evaluate both sides of a catalog identity on a grid.

    Args:
        identity_id: 'R1' .. 'R15'
        params: ParamPair or OmegaParams
        grid: evaluation points (x or t)
        spec: quadrature settings; defaults from config
        tolerance: pass threshold on the max relative error

    Returns:
        IdentityCheckReport
    """
    identity = get_identity(identity_id)
    pair = as_pair(params)
    identity.check_domain(pair)
    spec = spec or QuadratureSpec(**config.get_quadrature_defaults())
    if tolerance is None:
        tolerance = config.get_identity_tolerance(identity_id, identity.nested)
    grid = tuple(require_finite('grid point', x) for x in grid)
    if not grid or min(grid) <= 0:
        raise DomainError("identity grid must be a non-empty set of positive points")

    points: List[IdentityPoint] = []
    for x in grid:
        local = _spec_for(identity, pair, x, spec)
        lhs = float(identity.lhs(pair, x, local))
        rhs = float(identity.rhs(pair, x, local))
        points.append(IdentityPoint(x, lhs, rhs, relative_error(lhs, rhs)))
        logger.debug("%s %s x=%g: lhs=%.17g rhs=%.17g", identity_id, pair, x, lhs, rhs)

    worst = max(points, key=lambda p: p.rel_err)
    passed = worst.rel_err <= tolerance
    if not passed:
        logger.warning("%s failed for %s: max rel err %.3g at %g", identity_id, pair,
                       worst.rel_err, worst.x)
    return IdentityCheckReport(identity_id, pair, grid, worst.rel_err, worst.x, passed,
                               tolerance, tuple(points))


def check_catalog(identity_ids: Iterable[str] = IDENTITY_IDS, params_list=None,
                  grid: Sequence[float] = DEFAULT_GRID,
                  spec: Optional[QuadratureSpec] = None) -> List[IdentityCheckReport]:
    """Run several identities, each over its own default parameter grid unless one is given."""
    reports = []
    for identity_id in identity_ids:
        identity = get_identity(identity_id)
        for pair in (params_list or identity.default_params()):
            reports.append(check_identity(identity_id, pair, grid, spec))
    return reports
