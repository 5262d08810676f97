"""
Kernel functions of the Gamma-ratio integral representations.

Phi, its derivative and phi = Phi + (a - b); the piecewise linear kernels
xi, eta and the recurrence term Theta; w, w', (log w)'', W, q and p.
Every kernel accepts a scalar or a numpy array; small arguments use
Taylor expansions with exact Bernoulli coefficients.
"""
import math
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np

from errors import DomainError
from models import (ParamPair, Breakpoints, Growth, GrowthClass, QuadratureSpec,
                    ScalarFunction, PropertyReport, as_pair)
from quadrature import periodic_tail
from special_core import bernoulli_number, bernoulli_polynomial, gamma

logger = logging.getLogger(__name__)

# Below this the defining quotients are replaced by their Taylor series
TAYLOR_SWITCH = 1e-2
TAYLOR_TERMS = 16

# Absolute slack for the piecewise linear kernels
KERNEL_TOL = 1e-12


def _argument(name: str, t, strict: bool = True) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    if strict and np.any(arr <= 0):
        raise DomainError(f"{name} must be > 0")
    if not strict and np.any(arr < 0):
        raise DomainError(f"{name} must be >= 0")
    return np.atleast_1d(arr), arr.ndim == 0


def _result(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


def _split(t: np.ndarray):
    small = t < TAYLOR_SWITCH
    return small, ~small


# ============================================================================
# TAYLOR COEFFICIENTS
# ============================================================================

@lru_cache(maxsize=256)
def _phi_coefficients(a: float, b: float) -> np.ndarray:
    """c[k] with Phi(t) = sum_k c[k] t^k, k = 0..TAYLOR_TERMS-1 (c[0] = 0)."""
    coeffs = np.zeros(TAYLOR_TERMS)
    for n in range(2, TAYLOR_TERMS + 1):
        diff = bernoulli_polynomial(n, b) - bernoulli_polynomial(n, a)
        coeffs[n - 1] = float((-1) ** n * diff / math.factorial(n))
    return coeffs


def _bernoulli_series(shift: int, weight) -> np.ndarray:
    """Coefficients sum_n B_n weight(n) / n! t^(n - shift) for n >= shift."""
    coeffs = np.zeros(TAYLOR_TERMS)
    for n in range(shift, shift + TAYLOR_TERMS):
        coeffs[n - shift] = float(bernoulli_number(n) * weight(n) / math.factorial(n))
    return coeffs


# 1/(e^t - 1) - 1/t
_G_COEFFS = _bernoulli_series(1, lambda n: 1)
# log((1 - e^-t)/t), starting at t^1
_LOG_SINC_COEFFS = _bernoulli_series(1, lambda n: 1 / n)
# 1/t^2 - e^t/(e^t - 1)^2
_H_COEFFS = _bernoulli_series(2, lambda n: n - 1)


def _power_series(coeffs: np.ndarray, t: np.ndarray) -> np.ndarray:
    """sum_k coeffs[k] t^k by Horner."""
    return np.polyval(coeffs[::-1], t)


def _g(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    small, large = _split(t)
    out[small] = _power_series(_G_COEFFS, t[small])
    with np.errstate(over='ignore'):
        out[large] = 1.0 / np.expm1(t[large]) - 1.0 / t[large]
    return out


def _log_sinc(t: np.ndarray) -> np.ndarray:
    """log((1 - e^-t) / t)."""
    out = np.empty_like(t)
    small, large = _split(t)
    out[small] = t[small] * _power_series(_LOG_SINC_COEFFS, t[small])
    out[large] = np.log(-np.expm1(-t[large]) / t[large])
    return out


def _h(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    small, large = _split(t)
    out[small] = _power_series(_H_COEFFS, t[small])
    with np.errstate(over='ignore'):
        out[large] = 1.0 / t[large] ** 2 - 0.25 / np.sinh(0.5 * t[large]) ** 2
    return out


# ============================================================================
# PHI AND ITS DERIVATIVE
# ============================================================================

def _varphi(pair: ParamPair, t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    small, large = _split(t)
    out[small] = pair.lam + _power_series(_phi_coefficients(pair.a, pair.b), t[small])
    tl = t[large]
    out[large] = np.exp(-pair.b * tl) * np.expm1(-pair.lam * tl) / np.expm1(-tl)
    return out


def phi(params, t):
    """
    Phi_{a,b}(t) = (b - a) + (e^-bt - e^-at) / (1 - e^-t).

    Tends to 0 as t -> 0+ and to b - a as t -> infinity.
    """
    pair = as_pair(params)
    t, scalar = _argument('t', t)
    out = np.empty_like(t)
    small, large = _split(t)
    out[small] = _power_series(_phi_coefficients(pair.a, pair.b), t[small])
    out[large] = _varphi(pair, t[large]) - pair.lam
    return _result(out, scalar)


def phi_prime(params, t):
    """
    Phi'_{a,b}(t) by the quotient rule with N = e^-bt - e^-at and
    D = 1 - e^-t.
    """
    pair = as_pair(params)
    t, scalar = _argument('t', t)
    out = np.empty_like(t)
    small, large = _split(t)
    coeffs = _phi_coefficients(pair.a, pair.b)
    derived = coeffs[1:] * np.arange(1, TAYLOR_TERMS)
    out[small] = _power_series(derived, t[small])
    tl = t[large]
    decay = np.exp(-pair.b * tl)
    numer = -decay * np.expm1(-pair.lam * tl)
    numer_prime = decay * (pair.a * np.exp(-pair.lam * tl) - pair.b)
    denom = -np.expm1(-tl)
    out[large] = (numer_prime * denom - numer * np.exp(-tl)) / denom ** 2
    return _result(out, scalar)


def varphi(params, t):
    """phi_{a,b}(t) = (e^-bt - e^-at) / (1 - e^-t) = Phi(t) + (a - b)."""
    pair = as_pair(params)
    t, scalar = _argument('t', t)
    return _result(_varphi(pair, t), scalar)


# ============================================================================
# PIECEWISE LINEAR KERNELS
# ============================================================================

def _counts(c: float, s: np.ndarray) -> np.ndarray:
    """Number of k >= 0 with k + c <= s."""
    return np.where(s >= c, np.floor(s - c) + 1.0, 0.0)


def _xi_from_counts(pair: ParamPair, s, n_a, n_b):
    # a-terms and b-terms pair off for k < n_a; n_b - n_a b-terms remain
    r = n_b - n_a
    return pair.lam * (s - n_a) - (r * (s - pair.b - n_a) - 0.5 * r * (r - 1.0))


def _weighted_ramp_sum(c, n, s):
    """sum_{k<n} (c + k)(s - c - k)."""
    u = s - c
    return n * c * u + (u - c) * 0.5 * n * (n - 1.0) - (n - 1.0) * n * (2.0 * n - 1.0) / 6.0


def _eta_from_counts(pair: ParamPair, s, n_a, n_b):
    # (b+k)(s-b-k) - (a+k)(s-a-k) = (a-b)(a+b+2k-s)
    paired = pair.lam * (n_a * (pair.a + pair.b - s) + n_a * (n_a - 1.0))
    return paired + _weighted_ramp_sum(pair.b + n_a, n_b - n_a, s)


def xi(params, s):
    """
    xi(s) = (a-b)s + sum_k (1[s >= k+a](s-k-a) - 1[s >= k+b](s-k-b)).

    Continuous and piecewise linear with kinks at k+a and k+b.
    """
    pair = as_pair(params)
    s, scalar = _argument('s', s, strict=False)
    values = _xi_from_counts(pair, s, _counts(pair.a, s), _counts(pair.b, s))
    return _result(values, scalar)


def eta(params, s):
    """
    eta(s) = sum_k ((b+k) 1[s >= k+b](s-k-b) - (a+k) 1[s >= k+a](s-k-a)).
    """
    pair = as_pair(params)
    s, scalar = _argument('s', s, strict=False)
    values = _eta_from_counts(pair, s, _counts(pair.a, s), _counts(pair.b, s))
    return _result(values, scalar)


def one_sided_limits(params, kernel: str, points) -> Tuple[np.ndarray, np.ndarray]:
    """
    Left and right limits of xi or eta at the given points, computed from
    the closed form with the indicator counts of each side.
    """
    pair = as_pair(params)
    s, _ = _argument('s', points)
    left = np.nextafter(s, -np.inf)
    form = {'xi': _xi_from_counts, 'eta': _eta_from_counts}[kernel]
    return (form(pair, s, _counts(pair.a, left), _counts(pair.b, left)),
            form(pair, s, _counts(pair.a, s), _counts(pair.b, s)))


def theta(params, s):
    """
    Theta(s) = (a-b) + 1[s >= a-1](s+1-a) - 1[s >= b-1](s+1-b), so that
    xi(s+1) = xi(s) + Theta(s).
    """
    pair = as_pair(params)
    s, scalar = _argument('s', s, strict=False)
    a_term = np.where(s >= pair.a - 1.0, s + 1.0 - pair.a, 0.0)
    b_term = np.where(s >= pair.b - 1.0, s + 1.0 - pair.b, 0.0)
    return _result(pair.lam + a_term - b_term, scalar)


def eta_growth_constant(params) -> float:
    """C with eta(s) <= C s: (a-b) max(a-1, b) + eta(ceil(a) + 1)."""
    pair = as_pair(params)
    return pair.lam * max(pair.a - 1.0, pair.b) + eta(pair, math.ceil(pair.a) + 1.0)


def _period_window(pair: ParamPair) -> np.ndarray:
    """Kinks of xi and eta in one period [a-1, a], with its endpoints."""
    start = max(pair.a - 1.0, 0.0)
    pts = Breakpoints.for_pair(pair, start + 1.0).within(start, start + 1.0)
    return np.concatenate([[start], pts, [start + 1.0]])


@dataclass(frozen=True)
class EtaTrend:
    """eta(s) = slope*s + intercept + O(1 + s) oscillation of period 1."""
    slope: float
    intercept: float
    deviation: float


@lru_cache(maxsize=256)
def _eta_trend(a: float, b: float) -> EtaTrend:
    pair = ParamPair(a, b)
    slope = 0.5 * pair.lam * (a + b - 1.0)
    intercept = float((bernoulli_polynomial(3, b) - bernoulli_polynomial(3, a)) / 3)
    window = _period_window(pair)
    # from eta(s+1) - eta(s) = (a-b)(a+b-1) - xi(s) on [a-1, inf)
    offset = np.max(np.abs(eta(pair, window) - slope * window - intercept))
    drift = np.max(np.abs(slope - xi(pair, window)))
    return EtaTrend(slope, intercept, float(offset + drift))


def eta_trend(params) -> EtaTrend:
    """Mean linear trend of eta and a bound on the deviation from it."""
    pair = as_pair(params)
    return _eta_trend(pair.a, pair.b)


def xi_maximum(params) -> float:
    """max xi over [0, inf); xi is periodic beyond a-1."""
    pair = as_pair(params)
    pts = Breakpoints.for_pair(pair, pair.a + 1.0).points
    return float(np.max(xi(pair, np.concatenate([[0.0], pts]))))


# ============================================================================
# w AND RELATED KERNELS
# ============================================================================

def _log_w(pair: ParamPair, t: np.ndarray) -> np.ndarray:
    return (pair.lam - 1.0) * _log_sinc(t) - pair.b * t


def w_kernel(params, t):
    """w(t) = ((1 - e^-t)/t)^(a-b-1) e^-bt."""
    pair = as_pair(params)
    t, scalar = _argument('t', t)
    return _result(np.exp(_log_w(pair, t)), scalar)


def one_minus_w(params, t):
    """1 - w(t) without cancellation near t = 0."""
    pair = as_pair(params)
    t, scalar = _argument('t', t)
    return _result(-np.expm1(_log_w(pair, t)), scalar)


def w_prime(params, t):
    """w'(t) = w(t) [(a-b-1)(e^-t/(1 - e^-t) - 1/t) - b]."""
    pair = as_pair(params)
    t, scalar = _argument('t', t)
    values = np.exp(_log_w(pair, t)) * ((pair.lam - 1.0) * _g(t) - pair.b)
    return _result(values, scalar)


def log_w_second(params, t):
    """(log w)''(t) = (a-b-1)(1/t^2 - e^t/(e^t - 1)^2)."""
    pair = as_pair(params)
    t, scalar = _argument('t', t)
    return _result((pair.lam - 1.0) * _h(t), scalar)


def W_kernel(params, t):
    """W(t) = t^((a-b) - [a-b] - 1) w(t)."""
    pair = as_pair(params)
    t, scalar = _argument('t', t)
    exponent = pair.lam - pair.lam_floor - 1.0
    return _result(np.power(t, exponent) * np.exp(_log_w(pair, t)), scalar)


def p_of_t(params, t):
    """p(t) = (1 - w(t)) / Gamma(a-b); nondecreasing from 0 to 1/Gamma(a-b)."""
    pair = as_pair(params)
    t, scalar = _argument('t', t)
    return _result(-np.expm1(_log_w(pair, t)) / gamma(pair.lam), scalar)


def sinh_ratio_margin(lam: float, t):
    """(sinh(lam t/2)/sinh(t/2))^2 - lam^2, positive for lam > 1."""
    t, scalar = _argument('t', t)
    with np.errstate(over='ignore', invalid='ignore'):
        ratio = np.sinh(0.5 * lam * t) / np.sinh(0.5 * t)
        # for large t the ratio is e^((lam-1)t/2) to working precision
        ratio = np.where(np.isfinite(ratio), ratio, np.exp(0.5 * (lam - 1.0) * t))
    return _result(ratio ** 2 - lam ** 2, scalar)


# ============================================================================
# q(t) = int_0^t eta(s)/s^3 ds
# ============================================================================

def eta_function(params) -> ScalarFunction:
    """eta as a handle with linear growth, its mean trend and its period-1 increment."""
    pair = as_pair(params)
    trend = eta_trend(pair)
    growth = GrowthClass.linear(eta_growth_constant(pair), trend.slope, trend.intercept,
                                trend.deviation, period=1.0, periodic_from=max(pair.a - 1.0, 0.0),
                                increment=lambda s: 2.0 * trend.slope - xi(pair, s))
    return ScalarFunction(lambda s: eta(pair, s), label=f"eta[{pair}]",
                          growth=growth, vectorized=True)


def xi_function(params) -> ScalarFunction:
    """xi as a bounded handle oscillating around its mean, periodic beyond a-1."""
    pair = as_pair(params)
    mean = 0.5 * pair.lam * (pair.a + pair.b - 1.0)
    top = xi_maximum(pair)
    growth = GrowthClass(Growth.BOUNDED, top, slope=0.0, intercept=mean,
                         deviation=max(top - mean, mean), period=1.0,
                         periodic_from=max(pair.a - 1.0, 0.0))
    return ScalarFunction(lambda s: xi(pair, s), label=f"xi[{pair}]",
                          growth=growth, vectorized=True)


def _segment_integrals(s0: np.ndarray, e0: np.ndarray, s1: np.ndarray, e1: np.ndarray) -> np.ndarray:
    """int_s0^s1 eta(s)/s^3 ds where eta is linear between (s0, e0) and (s1, e1)."""
    return (s1 - s0) * (e0 * s1 / s0 + e1) / (2.0 * s0 * s1 * s1)


@dataclass(frozen=True, eq=False)
class QTable:
    """Running integral of eta/s^3 at the kinks of eta, with q(inf)."""
    pair: ParamPair
    cuts: np.ndarray
    running: np.ndarray
    q_infinity: float
    error: float
    spec: QuadratureSpec

    def __call__(self, t: np.ndarray) -> np.ndarray:
        out = np.zeros_like(t)
        upper = self.cuts[-1]
        inside = (t > self.pair.b) & (t <= upper)
        if np.any(inside):
            ti = t[inside]
            idx = np.clip(np.searchsorted(self.cuts, ti, side='right') - 1, 0, len(self.cuts) - 1)
            start = self.cuts[idx]
            partial = _segment_integrals(start, eta(self.pair, start), ti, eta(self.pair, ti))
            out[inside] = self.running[idx] + partial
        beyond = t > upper
        if np.any(beyond):
            handle = eta_function(self.pair)
            tails = [periodic_tail(handle, 3.0, 0.0, float(v), self.spec).value for v in t[beyond]]
            out[beyond] = self.q_infinity - np.array(tails)
        return out


@lru_cache(maxsize=32)
def _q_table(a: float, b: float, abs_tol: float, rel_tol: float,
             max_subdivisions: int, upper: float) -> QTable:
    pair = ParamPair(a, b)
    spec = QuadratureSpec(abs_tol, rel_tol, max_subdivisions)
    pts = Breakpoints.for_pair(pair, upper).within(b, upper)
    cuts = np.concatenate([[b], pts, [upper]])
    values = eta(pair, cuts)
    segments = _segment_integrals(cuts[:-1], values[:-1], cuts[1:], values[1:])
    running = np.concatenate([[0.0], np.cumsum(segments)])
    tail = periodic_tail(eta_function(pair), 3.0, 0.0, upper, spec)
    rounding = len(cuts) * np.finfo(float).eps * float(np.sum(np.abs(segments)))
    logger.debug("q table for %s: %d cuts, tail %.17g +- %.3g", pair, len(cuts), tail.value, tail.error)
    return QTable(pair, cuts, running, float(running[-1] + tail.value), tail.error + rounding, spec)


def q_table(params, spec: Optional[QuadratureSpec] = None) -> QTable:
    """Cached running-integral table behind q_of_t."""
    pair = as_pair(params)
    spec = spec or QuadratureSpec()
    return _q_table(pair.a, pair.b, spec.abs_tol, spec.rel_tol, spec.max_subdivisions,
                    spec.truncation.stieltjes_upper)


def q_of_t(params, t, spec: Optional[QuadratureSpec] = None):
    """
    q(t) = int_0^t eta(s)/s^3 ds.

    The integrand vanishes on [0, b) and eta is linear between its kinks,
    so the running integral is tabulated in closed form once per parameter
    pair; beyond the table q(inf) minus the periodic tail is used.
    """
    t, scalar = _argument('t', t)
    table = q_table(params, spec)
    return _result(table(t), scalar)


def q_infinity(params, spec: Optional[QuadratureSpec] = None) -> float:
    """lim q(t) as t -> infinity."""
    return q_table(params, spec).q_infinity


# ============================================================================
# STRUCTURAL PROPERTIES
# ============================================================================

def _report(check_id, label, pair, margins, grid, tol) -> PropertyReport:
    worst = int(np.argmin(margins))
    margin = float(margins[worst])
    return PropertyReport(check_id, label, pair, margin, float(grid[worst]), margin >= -tol, tol)


def structure_checks(params, s_max: float = 40.0, count: int = 10000) -> List[PropertyReport]:
    """Nonnegativity, periodicity, recurrence and continuity of xi and eta."""
    pair = as_pair(params)
    grid = np.linspace(0.0, s_max, count)
    xs, es = xi(pair, grid), eta(pair, grid)
    reports = [
        _report('KERNEL:xi-nonnegative', 'xi(s) >= 0', pair, xs, grid, KERNEL_TOL),
        _report('KERNEL:eta-nonnegative', 'eta(s) >= 0', pair, es, grid, KERNEL_TOL),
    ]
    late = grid[grid >= pair.a - 1.0]
    reports.append(_report('KERNEL:xi-periodic', 'xi(s+1) = xi(s) for s >= a-1', pair,
                           -np.abs(xi(pair, late + 1.0) - xi(pair, late)), late, KERNEL_TOL))
    reports.append(_report('KERNEL:xi-recurrence', 'xi(s+1) - xi(s) = Theta(s)', pair,
                           -np.abs(xi(pair, grid + 1.0) - xs - theta(pair, grid)), grid, KERNEL_TOL))
    trend = eta_trend(pair)
    step = -np.abs(eta(pair, late + 1.0) - eta(pair, late) - 2.0 * trend.slope + xi(pair, late))
    reports.append(_report('KERNEL:eta-increment', 'eta(s+1) - eta(s) = (a-b)(a+b-1) - xi(s)',
                           pair, step, late, 1e-10))
    kinks = Breakpoints.for_pair(pair, s_max).points
    for name in ('xi', 'eta'):
        left, right = one_sided_limits(pair, name, kinks)
        reports.append(_report(f'KERNEL:{name}-continuous', f'{name} continuous at kinks', pair,
                               -np.abs(left - right), kinks, KERNEL_TOL))
    growth = eta_growth_constant(pair)
    positive = grid[grid > 0]
    reports.append(_report('KERNEL:eta-linear-bound', 'eta(s) <= C s', pair,
                           growth * positive - eta(pair, positive), positive, KERNEL_TOL))
    return reports


def inequality_checks(params, grid=None) -> List[PropertyReport]:
    """
    Positivity of the sinh ratio margin at lambda = a - b and, when
    a - b > 1, the convexity and monotonicity facts used for w.
    """
    pair = as_pair(params)
    grid = np.geomspace(0.01, 50.0, 200) if grid is None else np.asarray(grid, dtype=float)
    reports = []
    if pair.lam > 1:
        reports.append(_report('INEQ:sinh-ratio', '(sinh(lt/2)/sinh(t/2))^2 > l^2', pair,
                               sinh_ratio_margin(pair.lam, grid), grid, 0.0))
        reports.append(_report('INEQ:log-w-convex', "(log w)'' > 0", pair,
                               log_w_second(pair, grid), grid, 0.0))
        reports.append(_report('INEQ:w-decreasing', "w' < 0", pair,
                               -w_prime(pair, grid), grid, 0.0))
        combo = one_minus_w(pair, grid) + grid * w_prime(pair, grid)
        reports.append(_report('INEQ:one-minus-w-plus-tw-prime', "1 - w + t w' >= 0", pair,
                               combo, grid, KERNEL_TOL))
        reports.append(_report('INEQ:one-minus-w-plus-tw-prime-increasing',
                               "1 - w + t w' nondecreasing", pair,
                               np.diff(combo), grid[1:], KERNEL_TOL))
    if pair.b < pair.a - 1.0:
        reports.append(_report('INEQ:varphi-log-convex', '(log phi)\'\' >= 0 (midpoint form)', pair,
                               _midpoint_log_convexity(lambda t: varphi(pair, t), grid), grid[1:-1],
                               KERNEL_TOL))
    return reports


def _midpoint_log_convexity(func, grid):
    """Chord of log f over neighbouring grid points minus log f; >= 0 when log f is convex."""
    logs = np.log(func(grid))
    left, mid, right = grid[:-2], grid[1:-1], grid[2:]
    weight = (right - mid) / (right - left)
    interpolated = weight * logs[:-2] + (1.0 - weight) * logs[2:]
    return interpolated - logs[1:-1]
