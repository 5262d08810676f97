"""
Quadrature for the integral representations.

Finite ranges go to QUADPACK through ``scipy.integrate.quad``, with the
kinks of the integrand handed over as initial break points. Semi-infinite
Laplace integrals are truncated and the remainder is bounded from the
growth class the integrand declares; the engine refuses integrands that
declare none. Algebraic kernels (shift + t)^(-rho) sum a quasi-periodic
tail exactly through Hurwitz zeta values, or cut the range and integrate
the declared trend in closed form.
"""
import math
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import zeta

from errors import DomainError, QuadratureError, UndeclaredGrowthError
from models import Growth, GrowthClass, QuadratureSpec, ScalarFunction, require_finite
from special_core import upper_incomplete_gamma_bound

logger = logging.getLogger(__name__)

VectorFunc = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureResult:
    """
    Integral estimate with its error estimate.

    ``magnitude`` is the sum of |value| over the pieces that were
    integrated separately; relative targets refer to it.
    """
    value: float
    error: float
    panels: int = 0
    upper: float = math.inf
    magnitude: float = 0.0

    def __add__(self, other: 'QuadratureResult') -> 'QuadratureResult':
        return QuadratureResult(self.value + other.value, self.error + other.error,
                                self.panels + other.panels, max(self.upper, other.upper),
                                self.magnitude + other.magnitude)


def as_vector_func(func) -> VectorFunc:
    """Wrap a ScalarFunction or a plain callable as an array-in/array-out map."""
    if isinstance(func, ScalarFunction):
        return func.evaluate
    return lambda t: np.asarray(func(t), dtype=float)


def declared_growth(func) -> GrowthClass:
    """The growth class of an integrand handle, or UndeclaredGrowthError."""
    growth = getattr(func, 'growth', None)
    if growth is None:
        raise UndeclaredGrowthError(getattr(func, 'label', repr(func)))
    return growth


# ============================================================================
# QUADPACK DRIVER
# ============================================================================

def _pointwise(func: VectorFunc, label: str) -> Callable[[float], float]:
    """Scalar view of a vectorised integrand that refuses non-finite values."""

    def value(t):
        out = float(np.asarray(func(np.array([t])), dtype=float).ravel()[0])
        if not math.isfinite(out):
            raise QuadratureError(f"{label or 'integrand'} is not finite at t={t!r}")
        return out

    return value


def _quadpack(func: VectorFunc, lower: float, upper: float, inner: np.ndarray,
              spec: QuadratureSpec, label: str = '', epsabs: Optional[float] = None):
    """
    One adaptive QUADPACK call over [lower, upper].

    ``inner`` holds the initial break points, strictly inside the range;
    the subdivision budget comes on top of the intervals they create.

    Returns:
        tuple: (value, error estimate, infodict)
    """
    options = {
        'epsabs': spec.abs_tol if epsabs is None else epsabs,
        'epsrel': spec.rel_tol,
        'limit': spec.max_subdivisions + len(inner) + 1,
        'full_output': 1,
    }
    if len(inner):
        options['points'] = inner
    out = quad(_pointwise(func, label), lower, upper, **options)
    value, error, info = out[0], out[1], out[2]
    if len(out) > 3:
        logger.debug("quad on %s over [%g, %g]: %s", label or 'integrand', lower, upper, out[3])
    return value, error, info


def _power_substituted(func: VectorFunc, exponent: float) -> VectorFunc:
    """Integrand after t = u^(1/exponent), which removes a t^(exponent-1) singularity."""
    inv = 1.0 / exponent

    def transformed(u):
        t = np.power(u, inv)
        return func(t) * np.power(t, 1.0 - exponent) * inv

    return transformed


def _cuts(lower: float, upper: float, spec: QuadratureSpec, extra: Iterable[float] = ()) -> np.ndarray:
    points = [lower, upper]
    points.extend(p for p in extra if lower < p < upper)
    inner = spec.breakpoints.within(lower, upper)
    return np.unique(np.concatenate([np.asarray(points, dtype=float), inner]))


def _integrate_range(func: VectorFunc, lower: float, upper: float, spec: QuadratureSpec,
                     extra: Iterable[float] = (), singular_exponent: Optional[float] = None,
                     label: str = '', epsabs: Optional[float] = None) -> QuadratureResult:
    cuts = _cuts(lower, upper, spec, extra)
    result = QuadratureResult(0.0, 0.0, 0, upper)
    if singular_exponent is not None and lower == 0.0 and singular_exponent != 1.0:
        head_upper = cuts[1] ** singular_exponent
        value, error, info = _quadpack(_power_substituted(func, singular_exponent), 0.0, head_upper,
                                       cuts[:0], spec, label, epsabs)
        result = result + QuadratureResult(value, error, info['last'], upper, abs(value))
        cuts = cuts[1:]
    if len(cuts) > 1:
        value, error, info = _quadpack(func, cuts[0], cuts[-1], cuts[1:-1], spec, label, epsabs)
        result = result + QuadratureResult(value, error, info['last'], upper, abs(value))
    return result


def _require_converged(result: QuadratureResult, spec: QuadratureSpec, label: str,
                       what: str = 'integral') -> QuadratureResult:
    if not result.error <= spec.target(max(abs(result.value), result.magnitude)):
        raise QuadratureError(f"{what} of {label or 'integrand'}: error estimate {result.error:.3g} "
                              f"misses the target for value {result.value:.17g}",
                              result.value, result.error)
    return result


def integrate(func, lower: float, upper: float, spec: Optional[QuadratureSpec] = None,
              singular_exponent: Optional[float] = None) -> QuadratureResult:
    """
    Integral of ``func`` over a finite interval.

    Args:
        func: ScalarFunction or vectorised callable
        lower, upper: finite limits, lower <= upper
        spec: tolerances and breakpoints
        singular_exponent: e in (0, 1) when func behaves like t^(e-1) at lower == 0

    Returns:
        QuadratureResult

    Raises:
        QuadratureError: the error estimate stays above the tolerance
    """
    spec = spec or QuadratureSpec()
    lower = require_finite('lower', lower)
    upper = require_finite('upper', upper)
    if upper < lower:
        raise DomainError(f"integration limits out of order: {lower!r} > {upper!r}")
    if upper == lower:
        return QuadratureResult(0.0, 0.0, 0, upper)
    if singular_exponent is not None and not 0 < singular_exponent:
        raise DomainError("singular exponent must be positive")
    exponent = singular_exponent if singular_exponent is not None and singular_exponent < 1 else None
    label = getattr(func, 'label', '')
    result = _integrate_range(as_vector_func(func), lower, upper, spec,
                              singular_exponent=exponent, label=label)
    return _require_converged(result, spec, label)


# ============================================================================
# LAPLACE TRANSFORMS
# ============================================================================

def laplace_tail_bound(growth: GrowthClass, x: float, upper: float) -> float:
    """Bound for |int_upper^inf e^(-x t) f(t) dt| given the growth of f."""
    bound = growth.bound
    if bound == 0:
        return 0.0
    if growth.kind is Growth.BOUNDED:
        return bound * math.exp(-x * upper) / x
    if growth.kind is Growth.LINEAR:
        return bound * math.exp(-x * upper) * ((1.0 + upper) / x + 1.0 / (x * x))
    lam = growth.exponent
    return bound * upper_incomplete_gamma_bound(lam, x * upper) / x ** lam


def laplace_with_error(f: ScalarFunction, x: float,
                       spec: Optional[QuadratureSpec] = None) -> QuadratureResult:
    """
    (L f)(x) = int_0^inf e^(-x t) f(t) dt with its error estimate.

    The range is cut at decades / x and doubled until the growth bound
    of the remainder falls under the tolerance. Transforms decay like
    e^(-x t_0) when f vanishes up to t_0, so the target is relative only.
    """
    spec = spec or QuadratureSpec()
    x = require_finite('x', x)
    if x <= 0:
        raise DomainError(f"Laplace argument must be positive, got {x!r}")
    growth = declared_growth(f)
    evaluate = as_vector_func(f)
    relative = spec.relative()

    def integrand(t):
        return np.exp(-x * t) * evaluate(t)

    singular = growth.exponent if growth.kind is Growth.POWER and growth.exponent < 1 else None
    upper = spec.truncation.initial_upper(x)
    result = _integrate_range(integrand, 0.0, upper, relative, (1.0 / x, 10.0 / x), singular, f.label)
    tail = laplace_tail_bound(growth, x, upper)
    while tail > relative.target(result.value) and upper < spec.truncation.max_upper:
        new_upper = min(2.0 * upper, spec.truncation.max_upper)
        result = result + _integrate_range(integrand, upper, new_upper, relative, label=f.label,
                                           epsabs=0.1 * spec.rel_tol * abs(result.value))
        upper = new_upper
        tail = laplace_tail_bound(growth, x, upper)
    if tail > relative.target(result.value):
        raise QuadratureError(f"Laplace tail of {f.label!r} at x={x!r} stays above tolerance",
                              result.value, result.error + tail)
    logger.debug("laplace %s x=%g: %d subintervals up to %g", f.label, x, result.panels, upper)
    total = QuadratureResult(result.value, result.error + tail, result.panels, upper, result.magnitude)
    return _require_converged(total, relative, f.label, 'Laplace transform')


def laplace(f: ScalarFunction, x: float, spec: Optional[QuadratureSpec] = None) -> float:
    """(L f)(x) for a function handle with declared growth."""
    return laplace_with_error(f, x, spec).value


# ============================================================================
# ALGEBRAIC (STIELTJES-TYPE) KERNELS
# ============================================================================

def algebraic_tail(growth: GrowthClass, rho: float, shift: float, upper: float):
    """
    int_upper^inf f(t) (shift + t)^(-rho) dt split into the integral of
    the declared trend and an estimate of the remainder.

    Returns:
        tuple: (trend contribution, residual estimate)
    """
    far = shift + upper
    slope = growth.slope if growth.has_trend else 0.0
    intercept = growth.intercept if growth.has_trend else 0.0
    value = intercept * far ** (1.0 - rho) / (rho - 1.0)
    if slope:
        # t = (shift + t) - shift
        value += slope * (far ** (2.0 - rho) / (rho - 2.0) - shift * far ** (1.0 - rho) / (rho - 1.0))

    if growth.has_trend:
        spread = growth.deviation
    else:
        spread = growth.bound
    linear = growth.kind is Growth.LINEAR
    if growth.period:
        period = growth.period
        amplitude = spread * (1.0 + upper) if linear else spread
        residual = amplitude * period * far ** (-rho) * (1.0 + rho * period / (rho - 1.0))
    elif linear:
        residual = spread * (far ** (1.0 - rho) / (rho - 1.0) + far ** (2.0 - rho) / (rho - 2.0))
    elif growth.kind is Growth.POWER and growth.exponent > 1:
        residual = spread * far ** (growth.exponent - rho) / (rho - growth.exponent)
    else:
        residual = spread * far ** (1.0 - rho) / (rho - 1.0)
    return value, residual


def _check_algebraic_order(growth: GrowthClass, rho: float):
    needed = {Growth.BOUNDED: 1.0, Growth.LINEAR: 2.0}.get(growth.kind, max(1.0, growth.exponent))
    if not rho > needed:
        raise DomainError(f"kernel exponent rho={rho!r} too small for {growth.kind.value} growth "
                          f"(needs rho > {needed:g})")


def periodic_tail(u: ScalarFunction, rho: float, shift: float, start: float,
                  spec: Optional[QuadratureSpec] = None) -> QuadratureResult:
    """
    int_start^inf u(t) (shift + t)^(-rho) dt for a quasi-periodic u.

    With u(t + kP) = u(t) + k d(t) the sum over periods folds into one
    period: the weights sum_k (z + k)^(-rho) and sum_k k (z + k)^(-rho)
    are zeta(rho, z) and zeta(rho - 1, z) - z zeta(rho, z), z = (shift + t)/P.
    """
    spec = spec or QuadratureSpec()
    growth = declared_growth(u)
    if not growth.quasi_periodic or start < growth.periodic_from:
        raise DomainError(f"{u.label!r} is not declared quasi-periodic from t={start!r}")
    if shift + start <= 0:
        raise DomainError("kernel (shift + t)^(-rho) is singular on the range")
    increment = growth.increment
    needed = 2.0 if increment is not None else 1.0
    if not rho > needed:
        raise DomainError(f"kernel exponent rho={rho!r} too small for the periodic tail "
                          f"(needs rho > {needed:g})")
    period = growth.period
    evaluate = as_vector_func(u)
    scale = period ** -rho

    def folded(t):
        z = (shift + t) / period
        weight = zeta(rho, z)
        body = evaluate(t) * weight
        if increment is not None:
            body = body + np.asarray(increment(t), dtype=float) * (zeta(rho - 1.0, z) - z * weight)
        return scale * body

    return _integrate_range(folded, start, start + period, spec.relative(),
                            label=f"tail of {u.label}")


def algebraic_integral(u: ScalarFunction, rho: float, shift: float, lower: float = 0.0,
                       spec: Optional[QuadratureSpec] = None) -> QuadratureResult:
    """
    int_lower^inf u(t) (shift + t)^(-rho) dt.

    Quasi-periodic integrands are integrated up to the start of their
    periodic regime and the rest is folded into one period. Otherwise the
    range is cut at the configured Stieltjes limit, the declared trend is
    integrated in closed form beyond it, and a residual estimate above the
    tolerance raises QuadratureError.
    """
    spec = spec or QuadratureSpec()
    growth = declared_growth(u)
    _check_algebraic_order(growth, rho)
    if shift + lower <= 0:
        raise DomainError("kernel (shift + t)^(-rho) is singular on the range")
    evaluate = as_vector_func(u)
    relative = spec.relative()

    def integrand(t):
        return evaluate(t) * np.power(shift + t, -rho)

    singular = None
    if growth.kind is Growth.POWER and growth.exponent < 1 and lower == 0.0:
        singular = growth.exponent

    if growth.quasi_periodic:
        start = max(lower, growth.periodic_from)
        result = QuadratureResult(0.0, 0.0, 0, start)
        if start > lower:
            result = _integrate_range(integrand, lower, start, relative, (), singular, u.label)
        result = result + periodic_tail(u, rho, shift, start, spec)
        return _require_converged(result, relative, u.label, 'algebraic integral')

    upper = max(spec.truncation.stieltjes_upper, 2.0 * (lower + 1.0))
    scale = shift if shift > 0 else max(lower, 1.0)
    geometric = scale * np.power(2.0, np.arange(0, int(math.log2(upper / scale)) + 1))
    result = _integrate_range(integrand, lower, upper, relative, geometric, singular, u.label)
    trend, residual = algebraic_tail(growth, rho, shift, upper)
    value = result.value + trend
    if residual > relative.target(value):
        raise QuadratureError(f"algebraic tail of {u.label!r} beyond t={upper:g} is known to "
                              f"{residual:.3g} only", value, result.error + residual)
    total = QuadratureResult(value, result.error + residual, result.panels, upper,
                             result.magnitude + abs(trend))
    return _require_converged(total, relative, u.label, 'algebraic integral')


def stieltjes_integral_with_error(u: ScalarFunction, rho: float, x: float,
                                  spec: Optional[QuadratureSpec] = None) -> QuadratureResult:
    """int_0^inf u(t) (x + t)^(-rho) dt with its error estimate."""
    x = require_finite('x', x)
    if x <= 0:
        raise DomainError(f"Stieltjes argument must be positive, got {x!r}")
    rho = require_finite('rho', rho)
    return algebraic_integral(u, rho, x, 0.0, spec)


def stieltjes_integral(u: ScalarFunction, rho: float, x: float,
                       spec: Optional[QuadratureSpec] = None) -> float:
    return stieltjes_integral_with_error(u, rho, x, spec).value
