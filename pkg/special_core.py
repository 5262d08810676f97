"""
Scalar special functions consumed by the rest of the library.

log Gamma, digamma, trigamma, the lower incomplete gamma function, complete
and incomplete Beta functions and the Gamma ratio Gamma(x+b)/Gamma(x+a).
All functions take real scalars, reject non-finite input with DomainError
and are pure.
"""
import math
import logging
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from errors import DomainError, ConvergenceError
from models import Precision, require_finite, as_pair, MACHINE_EPS

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.57721566490153286060651209008240243
HALF_LOG_TWO_PI = 0.91893853320467274178032973640561764

MAX_ITERATIONS = 1000
FPMIN = 1e-300
MACHINE_PRECISION = Precision()

# Asymptotic series are used from here on
_ASYMPTOTIC_MIN = 15.0
_ASYMPTOTIC_TERMS = 9


def _require_positive(name, value):
    value = require_finite(name, value)
    if value <= 0:
        raise DomainError(f"{name} must be > 0, got {value!r}")
    return value


def _require_nonnegative(name, value):
    value = require_finite(name, value)
    if value < 0:
        raise DomainError(f"{name} must be >= 0, got {value!r}")
    return value


# ============================================================================
# BERNOULLI AND ZETA CONSTANTS
# ============================================================================

@lru_cache(maxsize=None)
def bernoulli_number(n: int) -> Fraction:
    """
    Exact Bernoulli number B_n (convention B_1 = -1/2).

    Uses the recurrence sum_{k=0}^{n} C(n+1, k) B_k = 0.
    """
    if n < 0:
        raise DomainError(f"Bernoulli index must be >= 0, got {n}")
    if n == 0:
        return Fraction(1)
    if n > 1 and n % 2 == 1:
        return Fraction(0)
    total = sum(math.comb(n + 1, k) * bernoulli_number(k) for k in range(n))
    return -total / (n + 1)


def bernoulli_polynomial(n: int, x) -> Fraction:
    """
    Exact Bernoulli polynomial B_n(x) evaluated at the binary value of x.

    Returns a Fraction; callers convert to float once at the end.
    """
    x = Fraction(require_finite('x', x))
    return sum(math.comb(n, k) * bernoulli_number(k) * x ** (n - k) for k in range(n + 1))


def _zeta_minus_one(s: int, cut: int = 16) -> float:
    """zeta(s) - 1 by direct summation plus an Euler-Maclaurin tail at ``cut``."""
    head = math.fsum(n ** -s for n in range(2, cut))
    tail = cut ** (1 - s) / (s - 1) + 0.5 * cut ** -s
    rising = float(s)
    for j in range(1, 7):
        tail += float(bernoulli_number(2 * j)) / math.factorial(2 * j) * rising * cut ** (-s - 2 * j + 1)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
    return head + tail


_ZETA_MINUS_ONE = tuple(_zeta_minus_one(k) for k in range(2, 42))

_STIRLING_COEFFS = tuple(
    float(bernoulli_number(2 * k) / (2 * k * (2 * k - 1))) for k in range(1, _ASYMPTOTIC_TERMS + 1)
)
_DIGAMMA_COEFFS = tuple(
    float(bernoulli_number(2 * k) / (2 * k)) for k in range(1, _ASYMPTOTIC_TERMS + 1)
)
_TRIGAMMA_COEFFS = tuple(
    float(bernoulli_number(2 * k)) for k in range(1, _ASYMPTOTIC_TERMS + 1)
)


def _odd_power_series(coeffs, z):
    """sum_k coeffs[k] / z^(2k+1), smallest terms first."""
    inv = 1.0 / z
    inv2 = inv * inv
    powers = []
    power = inv
    for _ in coeffs:
        powers.append(power)
        power *= inv2
    return math.fsum(c * p for c, p in zip(coeffs, powers))


# ============================================================================
# LOG GAMMA
# ============================================================================

def _stirling_log_gamma(z: float) -> float:
    return (z - 0.5) * math.log(z) - z + HALF_LOG_TWO_PI + _odd_power_series(_STIRLING_COEFFS, z)


def _log_gamma_two_plus(eps: float) -> float:
    """
    log Gamma(2 + eps) for |eps| <= 1/2.

    eps(1 - gamma) + sum_{k>=2} (zeta(k) - 1)(-eps)^k / k, no cancellation
    near the zeros of log Gamma at 1 and 2.
    """
    terms = []
    for k, zm1 in enumerate(_ZETA_MINUS_ONE, start=2):
        power = (-eps) ** k
        terms.append(zm1 * power / k)
        if abs(power) < MACHINE_EPS * 1e-3:
            break
    terms.append(eps * (1.0 - EULER_GAMMA))
    return math.fsum(terms)


def log_gamma(x) -> float:
    """
    Natural logarithm of Gamma(x) for x > 0.

    Args:
        x: positive real

    Returns:
        float: log Gamma(x)

    Raises:
        DomainError: for x <= 0 or non-finite x
    """
    x = _require_positive('x', x)
    if x >= _ASYMPTOTIC_MIN:
        return _stirling_log_gamma(x)
    if x < 0.5:
        # Gamma(x) = Gamma(1 + x) / x
        return _log_gamma_two_plus(x) - math.log1p(x) - math.log(x)
    if x < 1.5:
        return _log_gamma_two_plus(x - 1.0) - math.log1p(x - 1.0)
    if x <= 2.5:
        return _log_gamma_two_plus(x - 2.0)
    # Gamma(x) = Gamma(y) * prod_{k=1}^{m} (x - k), y in [1.5, 2.5)
    m = int(math.floor(x - 1.5))
    product = 1.0
    for k in range(1, m + 1):
        product *= x - k
    return _log_gamma_two_plus(x - m - 2.0) + math.log(product)


def log_gamma_ratio(x, b, a) -> float:
    """
    log Gamma(x + b) - log Gamma(x + a).

    For large arguments the Stirling difference is assembled with log1p so
    the leading terms do not cancel.
    """
    x = _require_positive('x', x)
    lo, hi = x + b, x + a
    _require_positive('x + b', lo)
    _require_positive('x + a', hi)
    if min(lo, hi) < _ASYMPTOTIC_MIN:
        return log_gamma(lo) - log_gamma(hi)
    # (lo - 1/2) log lo - (hi - 1/2) log hi - lo + hi; the gap b - a is exact, lo - hi is not
    gap = b - a
    leading = (lo - 0.5) * math.log1p(gap / hi) + gap * math.log(hi) - gap
    return leading + _odd_power_series(_STIRLING_COEFFS, lo) - _odd_power_series(_STIRLING_COEFFS, hi)


def _log1p_excess(u: float) -> float:
    """(1 + u) log(1 + u) - u, by its series sum_n (-u)^n / (n (n-1)) for small u."""
    if abs(u) >= 0.1:
        return (1.0 + u) * math.log1p(u) - u
    terms = []
    power = u * u
    for n in range(2, 20):
        terms.append(power / (n * (n - 1)))
        power *= -u
    return math.fsum(terms)


def log_scaled_gamma_ratio(x, b, a) -> float:
    """
    (a - b) log x + log Gamma(x + b) - log Gamma(x + a).

    Of order 1/x for large x; the Stirling form is rearranged around log x
    so that no O(1) terms cancel.
    """
    x = _require_positive('x', x)
    lo, hi = x + b, x + a
    _require_positive('x + b', lo)
    _require_positive('x + a', hi)
    if min(lo, hi) < _ASYMPTOTIC_MIN:
        return (a - b) * math.log(x) + log_gamma(lo) - log_gamma(hi)
    # (x + c - 1/2) log(1 + c/x) - c = x h(c/x) - log(1 + c/x)/2
    leading = x * (_log1p_excess(b / x) - _log1p_excess(a / x)) - 0.5 * math.log1p((b - a) / hi)
    return leading + _odd_power_series(_STIRLING_COEFFS, lo) - _odd_power_series(_STIRLING_COEFFS, hi)


def gamma(x) -> float:
    """Gamma(x) for moderate positive x (via log_gamma)."""
    return math.exp(log_gamma(x))


# ============================================================================
# DIGAMMA / TRIGAMMA
# ============================================================================

def digamma(x) -> float:
    """
    psi(x) = (log Gamma)'(x) for x > 0.

    Upward recurrence psi(x) = psi(x + n) - sum 1/(x + k) into the
    asymptotic region.
    """
    x = _require_positive('x', x)
    shift = []
    while x < _ASYMPTOTIC_MIN:
        shift.append(1.0 / x)
        x += 1.0
    asymptotic = math.log(x) - 0.5 / x - _even_power_series(_DIGAMMA_COEFFS, x)
    return asymptotic - math.fsum(shift)


def _even_power_series(coeffs, z):
    """sum_k coeffs[k] / z^(2k+2)."""
    return _odd_power_series(coeffs, z) / z


def trigamma(x) -> float:
    """
    psi'(x) for x > 0.

    Upward recurrence psi'(x) = psi'(x + n) + sum 1/(x + k)^2; every term
    is positive.
    """
    x = _require_positive('x', x)
    shift = []
    while x < _ASYMPTOTIC_MIN:
        shift.append(1.0 / (x * x))
        x += 1.0
    inv = 1.0 / x
    asymptotic = inv + 0.5 * inv * inv + _odd_power_series(_TRIGAMMA_COEFFS, x) * inv * inv
    return asymptotic + math.fsum(shift)


# ============================================================================
# INCOMPLETE GAMMA
# ============================================================================

def _gamma_series(lam: float, x: float, precision: Precision) -> float:
    """sum_n x^n / (lam (lam+1) ... (lam+n))."""
    term = 1.0 / lam
    total = term
    ap = lam
    for _ in range(MAX_ITERATIONS):
        ap += 1.0
        term *= x / ap
        total += term
        if precision.converged(term, total):
            return total
    raise ConvergenceError(f"incomplete gamma series failed for lambda={lam!r}, x={x!r}")


def _gamma_continued_fraction(lam: float, x: float, precision: Precision) -> float:
    """Modified Lentz evaluation of e^x x^-lam Gamma(lam, x)."""
    b = x + 1.0 - lam
    c = 1.0 / FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITERATIONS + 1):
        an = -i * (i - lam)
        b += 2.0
        d = an * d + b
        if abs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < precision.rel_tol:
            return h
    raise ConvergenceError(f"incomplete gamma continued fraction failed for lambda={lam!r}, x={x!r}")


def lower_incomplete_gamma(lam, x, precision: Optional[Precision] = None) -> float:
    """
    gamma(lam, x) = int_0^x t^(lam-1) e^-t dt.

    Series for x < lam + 1, otherwise Gamma(lam) minus the continued
    fraction of the upper function. ``precision`` sets where both stop;
    machine precision by default.
    """
    precision = precision or MACHINE_PRECISION
    lam = _require_positive('lambda', lam)
    x = _require_nonnegative('x', x)
    if x == 0.0:
        return 0.0
    log_prefactor = lam * math.log(x) - x
    if x < lam + 1.0:
        return math.exp(log_prefactor) * _gamma_series(lam, x, precision)
    upper = math.exp(log_prefactor) * _gamma_continued_fraction(lam, x, precision)
    return gamma(lam) - upper


def upper_incomplete_gamma_bound(lam: float, y: float) -> float:
    """
    Upper bound for Gamma(lam, y) = int_y^inf t^(lam-1) e^-t dt.

    y^(lam-1) e^-y for lam <= 1; y^(lam-1) e^-y * y / (y - lam + 1) once
    y > lam - 1; the full Gamma(lam) otherwise.
    """
    if y <= 0:
        return gamma(lam)
    if lam <= 1.0:
        return math.exp((lam - 1.0) * math.log(y) - y)
    if y > lam - 1.0:
        return math.exp((lam - 1.0) * math.log(y) - y) * y / (y - lam + 1.0)
    return gamma(lam)


# ============================================================================
# BETA FUNCTIONS
# ============================================================================

def log_beta(p, q) -> float:
    p = _require_positive('p', p)
    q = _require_positive('q', q)
    return log_gamma(p) + log_gamma(q) - log_gamma(p + q)


def beta(p, q) -> float:
    """Complete Beta function B(p, q)."""
    return math.exp(log_beta(p, q))


def _beta_continued_fraction(p: float, q: float, x: float, precision: Precision) -> float:
    """Lentz evaluation of the incomplete Beta continued fraction."""
    qab = p + q
    qap = p + 1.0
    qam = p - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, MAX_ITERATIONS + 1):
        m2 = 2 * m
        aa = m * (q - m) * x / ((qam + m2) * (p + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(p + m) * (qab + m) * x / ((p + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < precision.rel_tol:
            return h
    raise ConvergenceError(f"incomplete beta continued fraction failed for p={p!r}, q={q!r}, x={x!r}")


def incomplete_beta(p, q, x, precision: Optional[Precision] = None) -> float:
    """
    Non-normalised incomplete Beta B(p, q, x) = int_0^x t^(p-1) (1-t)^(q-1) dt.

    Uses B(p, q, x) = B(p, q) - B(q, p, 1 - x) when x > p / (p + q).
    """
    precision = precision or MACHINE_PRECISION
    p = _require_positive('p', p)
    q = _require_positive('q', q)
    x = require_finite('x', x)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x!r}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return beta(p, q)
    if x <= p / (p + q):
        prefactor = math.exp(p * math.log(x) + q * math.log1p(-x))
        return prefactor * _beta_continued_fraction(p, q, x, precision) / p
    y = 1.0 - x
    prefactor = math.exp(q * math.log(y) + p * math.log(x))
    return beta(p, q) - prefactor * _beta_continued_fraction(q, p, y, precision) / q


# ============================================================================
# GAMMA RATIO
# ============================================================================

def gamma_ratio(x, pair) -> float:
    """
    Gamma(x + b) / Gamma(x + a), assembled from log-gamma values.

    Args:
        x: positive real
        pair: ParamPair (or OmegaParams)
    """
    pair = as_pair(pair)
    return math.exp(log_gamma_ratio(x, pair.b, pair.a))
