"""
Class-membership checks based on the sign pattern of forward differences.

For a completely monotonic g the differences (-1)^n Delta_h^n g(x) are
nonnegative for every step h, so a check needs values only; the budget
2^n * eps * max|g| * rounding_scale absorbs floating-point accumulation.
Bernstein-type and Stieltjes-type classes are reduced to this test through
one analytic derivative.
"""
import math
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

import families
import kernels
from errors import DomainError, MissingDerivativeError
from models import (MACHINE_EPS, ClassId, ClassReport, CMCheckSpec, ParamPair, ScalarFunction,
                    Witness, WitnessReport, as_pair)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SignScan:
    """Outcome of scanning one sign condition over a grid."""
    worst_violation: float
    witness: Optional[Witness]
    within_noise: bool
    orders: int


def _values(f: ScalarFunction, xs: np.ndarray, label: str) -> np.ndarray:
    values = f.evaluate(xs)
    if not np.all(np.isfinite(values)):
        bad = xs[~np.isfinite(values)]
        raise DomainError(f"{label} is not finite at x={float(bad.flat[0])!r}")
    return values


def _binomial_rows(order: int) -> List[np.ndarray]:
    """(-1)^k C(n, k) for n = 0..order, so row n dotted with f(x+kh) gives (-1)^n Delta_h^n f(x)."""
    return [np.array([(-1) ** k * math.comb(n, k) for k in range(n + 1)], dtype=float)
            for n in range(order + 1)]


def signed_differences(f: ScalarFunction, x: float, h: float, order: int) -> np.ndarray:
    """(-1)^n Delta_h^n f(x) for n = 0..order, each summed with math.fsum."""
    stencil = _values(f, x + h * np.arange(order + 1), f.label or 'function')
    return np.array([math.fsum(row * stencil[:len(row)]) for row in _binomial_rows(order)])


def _scan_cm(f: ScalarFunction, spec: CMCheckSpec, condition: str) -> SignScan:
    order = spec.max_order
    rows = _binomial_rows(order)
    grid = np.asarray(spec.grid, dtype=float)
    steps = np.array([spec.h(x) for x in grid])
    if not np.all(steps > 0):
        raise DomainError("difference steps must be positive")
    nodes = grid[:, None] + steps[:, None] * np.arange(order + 1)[None, :]
    table = _values(f, nodes, f.label or 'function')

    worst = 0.0
    noisy = False
    witness = None
    for i, x in enumerate(grid):
        stencil = table[i]
        scale = float(np.max(np.abs(stencil)))
        for n, row in enumerate(rows):
            signed = math.fsum(row * stencil[:n + 1])
            if signed >= 0:
                continue
            budget = (2.0 ** n) * MACHINE_EPS * scale * spec.rounding_scale
            worst = max(worst, -signed)
            if -signed <= budget:
                noisy = True
            elif witness is None:
                witness = Witness(float(x), n, float(steps[i]), signed, condition)
    if noisy:
        logger.warning("%s: sign violations within the rounding budget (%s)", f.label, condition)
    return SignScan(worst, witness, noisy, order)


def _report(class_id: ClassId, label: str, order, scan: SignScan, details: str = '') -> ClassReport:
    passed = scan.witness is None
    if not passed:
        logger.debug("%s fails %s at x=%g n=%d", label, class_id.value, scan.witness.x, scan.witness.n)
    return ClassReport(class_id, label, order, scan.worst_violation, passed, scan.witness,
                       scan.within_noise, scan.orders, details)


def _require_deriv(f: ScalarFunction):
    if not f.has_deriv:
        raise MissingDerivativeError(f.label)


# ============================================================================
# COMPLETE MONOTONICITY AND ITS REDUCTIONS
# ============================================================================

def cm_check(f: ScalarFunction, spec: Optional[CMCheckSpec] = None) -> ClassReport:
    """
    Check (-1)^n Delta_h^n f(x) >= 0 for n = 0..N on the grid.

    Args:
        f: function handle
        spec: difference order, grid and step rule

    Returns:
        ClassReport with a witness (x, n, h) on the first violation
    """
    spec = spec or CMCheckSpec()
    return _report(ClassId.CM, f.label, None, _scan_cm(f, spec, 'completely monotonic'))


def bernstein_transform(f: ScalarFunction, lam: float) -> ScalarFunction:
    """x^(1-lambda) f'(x), completely monotonic exactly when f is in B_lambda."""
    _require_deriv(f)
    return ScalarFunction(lambda x: x ** (1.0 - lam) * f.deriv(x), label=f"x^(1-{lam:g}){f.label}'")


def bernstein_check(f: ScalarFunction, lam: float, spec: Optional[CMCheckSpec] = None) -> ClassReport:
    """f > 0 on the grid and x^(1-lambda) f'(x) completely monotonic."""
    spec = spec or CMCheckSpec()
    if not lam > 0:
        raise DomainError(f"Bernstein order must be positive, got {lam!r}")
    transformed = bernstein_transform(f, lam)
    grid = np.asarray(spec.grid)
    values = _values(f, grid, f.label)
    if np.any(values <= 0):
        i = int(np.argmax(values <= 0))
        scan = SignScan(float(-values[i]), Witness(float(grid[i]), 0, 0.0, float(values[i]), 'f > 0'),
                        False, 0)
        return _report(ClassId.B_LAMBDA, f.label, lam, scan)
    scan = _scan_cm(transformed, spec, f"x^(1-lambda) f' completely monotonic")
    return _report(ClassId.B_LAMBDA, f.label, lam, scan)


def log_cm_check(f: ScalarFunction, spec: Optional[CMCheckSpec] = None) -> ClassReport:
    """-f'/f completely monotonic, for positive f."""
    spec = spec or CMCheckSpec()
    _require_deriv(f)
    values = _values(f, np.asarray(spec.grid), f.label)
    if np.any(values <= 0):
        raise DomainError(f"{f.label} must be positive for the log-CM check")
    ratio = ScalarFunction(lambda x: -f.deriv(x) / f(x), label=f"-{f.label}'/{f.label}")
    return _report(ClassId.LOGCM, f.label, None, _scan_cm(ratio, spec, "-f'/f completely monotonic"))


# ============================================================================
# STIELTJES NECESSARY CONDITIONS
# ============================================================================

def _grid_budget(values: np.ndarray, rounding_scale: float) -> np.ndarray:
    return rounding_scale * MACHINE_EPS * np.abs(values)


def _power_scaled_scan(f: ScalarFunction, rho: float, grid: np.ndarray,
                       rounding_scale: float) -> SignScan:
    scaled = np.power(grid, rho) * _values(f, grid, f.label)
    rises = np.diff(scaled)
    budget = _grid_budget(np.maximum(np.abs(scaled[:-1]), np.abs(scaled[1:])), rounding_scale)
    bad = np.flatnonzero(rises < -budget)
    worst = float(max(0.0, -np.min(rises))) if len(rises) else 0.0
    noisy = bool(np.any((rises < 0) & (rises >= -budget)))
    witness = None
    if len(bad):
        i = int(bad[0])
        witness = Witness(float(grid[i]), 0, float(grid[i + 1] - grid[i]), float(rises[i]),
                          f"x^{rho:g} f nondecreasing")
    return SignScan(worst, witness, noisy, 0)


def power_scaled_monotonicity_check(f: ScalarFunction, rho: float, grid=None,
                                    rounding_scale: Optional[float] = None) -> ClassReport:
    """x^rho f(x) nondecreasing along the grid, necessary for f in S_rho."""
    spec = CMCheckSpec()
    grid = np.sort(np.asarray(spec.grid if grid is None else grid, dtype=float))
    scale = spec.rounding_scale if rounding_scale is None else rounding_scale
    return _report(ClassId.S_RHO_NECESSARY, f.label, rho, _power_scaled_scan(f, rho, grid, scale),
                   'x^rho f nondecreasing only')


def stieltjes_necessary_check(f: ScalarFunction, rho: float,
                              spec: Optional[CMCheckSpec] = None) -> ClassReport:
    """
    Necessary conditions for f in S_rho:
    (i) f completely monotonic, (ii) x^rho f(x) nondecreasing,
    (iii) -f'(x) <= rho f(x)/x. The first failing condition decides.
    """
    spec = spec or CMCheckSpec()
    _require_deriv(f)
    if not rho > 0:
        raise DomainError(f"Stieltjes order must be positive, got {rho!r}")
    grid = np.sort(np.asarray(spec.grid, dtype=float))

    scans = [_scan_cm(f, spec, 'completely monotonic'),
             _power_scaled_scan(f, rho, grid, spec.rounding_scale)]

    values = _values(f, grid, f.label)
    slopes = np.array([f.deriv(float(x)) for x in grid])
    margin = rho * values / grid + slopes
    budget = _grid_budget(np.maximum(rho * np.abs(values) / grid, np.abs(slopes)), spec.rounding_scale)
    bad = np.flatnonzero(margin < -budget)
    witness = None
    if len(bad):
        i = int(bad[0])
        witness = Witness(float(grid[i]), 1, 0.0, float(margin[i]), f"-f' <= {rho:g} f/x")
    scans.append(SignScan(float(max(0.0, -np.min(margin))), witness,
                          bool(np.any((margin < 0) & (margin >= -budget))), 1))

    failed = next((s for s in scans if s.witness is not None), None)
    worst = max(s.worst_violation for s in scans)
    scan = SignScan(worst, None if failed is None else failed.witness,
                    any(s.within_noise for s in scans), spec.max_order)
    return _report(ClassId.S_RHO_NECESSARY, f.label, rho, scan, 'necessary conditions only')


# ============================================================================
# LOG-CONVEXITY
# ============================================================================

def log_convexity_check(f: ScalarFunction, grid=None, rounding_scale: Optional[float] = None) -> ClassReport:
    """
    f(x) f(y) >= f((x+y)/2)^2 for every pair of grid points, compared in
    logarithms, and f nonincreasing along the grid.
    """
    spec = CMCheckSpec()
    grid = np.sort(np.asarray(spec.grid if grid is None else grid, dtype=float))
    scale = spec.rounding_scale if rounding_scale is None else rounding_scale
    values = _values(f, grid, f.label)
    if np.any(values <= 0):
        bad = grid[values <= 0][0]
        raise DomainError(f"{f.label} is not positive at x={float(bad)!r}")
    logs = np.log(values)

    i, j = np.triu_indices(len(grid), k=1)
    mids = 0.5 * (grid[i] + grid[j])
    mid_values = _values(f, mids, f.label)
    if np.any(mid_values <= 0):
        raise DomainError(f"{f.label} is not positive at a midpoint")
    mid_logs = np.log(mid_values)
    margin = logs[i] + logs[j] - 2.0 * mid_logs
    budget = scale * MACHINE_EPS * (4.0 + np.abs(logs[i]) + np.abs(logs[j]) + 2.0 * np.abs(mid_logs))

    witness = None
    bad = np.flatnonzero(margin < -budget)
    if len(bad):
        k = int(bad[0])
        witness = Witness(float(mids[k]), 2, float(0.5 * (grid[j[k]] - grid[i[k]])),
                          float(margin[k]), 'log-convex')
    drops = -np.diff(values)
    drop_budget = _grid_budget(values[:-1], scale)
    rising = np.flatnonzero(drops < -drop_budget)
    if witness is None and len(rising):
        k = int(rising[0])
        witness = Witness(float(grid[k]), 1, float(grid[k + 1] - grid[k]), float(drops[k]),
                          'nonincreasing')
    worst = max(0.0, float(-np.min(margin)), float(-np.min(drops)) if len(drops) else 0.0)
    noisy = bool(np.any((margin < 0) & (margin >= -budget)))
    return _report(ClassId.LOGCONVEX, f.label, None, SignScan(worst, witness, noisy, 2))


# ============================================================================
# WITNESS SEARCH
# ============================================================================

def search_grid(grid=None, seed: Optional[int] = None, jitter: float = 0.0) -> np.ndarray:
    """Search grid, optionally jittered multiplicatively with a seeded generator."""
    grid = np.asarray(CMCheckSpec().grid if grid is None else grid, dtype=float)
    if seed is not None and jitter > 0:
        rng = np.random.default_rng(seed)
        grid = grid * np.exp(rng.uniform(-jitter, jitter, size=grid.shape))
    return np.sort(grid)


def non_membership_witness(f: ScalarFunction, class_id, order: float, grid=None,
                           spec: Optional[CMCheckSpec] = None, seed: Optional[int] = None,
                           jitter: float = 0.0) -> Optional[Witness]:
    """
    Scan for a point and order where the class's exact sign condition
    fails beyond the rounding budget.

    Returns:
        The first Witness found, or None (inconclusive).
    """
    class_id = ClassId(class_id)
    spec = (spec or CMCheckSpec()).with_grid(search_grid(grid, seed, jitter))
    if class_id is ClassId.B_LAMBDA:
        report = bernstein_check(f, order, spec)
    elif class_id is ClassId.S_RHO_NECESSARY:
        report = stieltjes_necessary_check(f, order, spec)
    else:
        raise DomainError(f"witness search supports B_lambda and S_rho_necessary, not {class_id.value}")
    if report.witness is None:
        logger.info("no witness for %s outside %s(%g)", f.label, class_id.value, order)
    return report.witness


def parse_class(text: str) -> Tuple[ClassId, float]:
    """'B2.5' -> (B_lambda, 2.5); 'S3' -> (S_rho_necessary, 3)."""
    text = text.strip()
    kinds = {'B': ClassId.B_LAMBDA, 'S': ClassId.S_RHO_NECESSARY}
    if not text or text[0].upper() not in kinds:
        raise DomainError(f"class must look like B<lambda> or S<rho>, got {text!r}")
    try:
        order = float(text[1:])
    except ValueError:
        raise DomainError(f"class order must be a number, got {text!r}")
    if not order > 0:
        raise DomainError(f"class order must be positive, got {text!r}")
    return kinds[text[0].upper()], order


# ============================================================================
# HANDLES USED BY THE SUITES
# ============================================================================

def neg_phi_over_t2(params) -> ScalarFunction:
    pair = as_pair(params)
    return ScalarFunction(lambda t: -kernels.phi(pair, t) / t ** 2, label=f"-Phi/t^2[{pair}]")


def neg_phi_prime_over_t2(params) -> ScalarFunction:
    pair = as_pair(params)
    return ScalarFunction(lambda t: -kernels.phi_prime(pair, t) / t ** 2, label=f"-Phi'/t^2[{pair}]")


def neg_w_prime_over_t3(params) -> ScalarFunction:
    pair = as_pair(params)
    return ScalarFunction(lambda t: -kernels.w_prime(pair, t) / t ** 3, label=f"-w'/t^3[{pair}]")


def W_function(params) -> ScalarFunction:
    pair = as_pair(params)
    return ScalarFunction(lambda t: kernels.W_kernel(pair, t), label=f"W[{pair}]")


def p_over_t4(params) -> ScalarFunction:
    pair = as_pair(params)
    return ScalarFunction(lambda t: kernels.p_of_t(pair, t) / t ** 4, label=f"p/t^4[{pair}]")


def w_function(params) -> ScalarFunction:
    pair = as_pair(params)
    return ScalarFunction(lambda t: kernels.w_kernel(pair, t), lambda t: kernels.w_prime(pair, t),
                          f"w[{pair}]")


def varphi_function(params) -> ScalarFunction:
    pair = as_pair(params)
    return ScalarFunction(lambda t: kernels.varphi(pair, t), label=f"varphi[{pair}]")


def neg_phi_function(params) -> ScalarFunction:
    pair = as_pair(params)
    return ScalarFunction(lambda x: -kernels.phi(pair, x), lambda x: -kernels.phi_prime(pair, x),
                          f"-Phi[{pair}]")


def inverse_sinc_exp() -> ScalarFunction:
    """1/(1 - e^-x)."""
    return families.elementary(lambda x: -1.0 / math.expm1(-x),
                               lambda x: -math.exp(-x) / math.expm1(-x) ** 2, '1/(1-e^-x)')


def thorin_transform(left, right, lam: float) -> ScalarFunction:
    """x^(1-lambda) (M_left M_right)'(x), with its derivative from M''."""
    p, q = as_pair(left), as_pair(right)

    def first(x):
        return families.M_deriv(p, x) * families.M(q, x) + families.M(p, x) * families.M_deriv(q, x)

    def second(x):
        return (families.M_second(p, x) * families.M(q, x)
                + 2.0 * families.M_deriv(p, x) * families.M_deriv(q, x)
                + families.M(p, x) * families.M_second(q, x))

    def value(x):
        return x ** (1.0 - lam) * first(x)

    def deriv(x):
        return (1.0 - lam) * x ** (-lam) * first(x) + x ** (1.0 - lam) * second(x)

    return ScalarFunction(value, deriv, f"x^(1-{lam:g})(M[{p}]M[{q}])'")


# ============================================================================
# SUITES
# ============================================================================

def cm_suite(params, spec: Optional[CMCheckSpec] = None) -> List[ClassReport]:
    """CM of -Phi/t^2, -Phi'/t^2, W and p/t^4, and of -w'/t^3 when a-b > 1."""
    pair = as_pair(params)
    handles = [neg_phi_over_t2(pair), neg_phi_prime_over_t2(pair), W_function(pair), p_over_t4(pair)]
    if pair.lam > 1:
        handles.append(neg_w_prime_over_t3(pair))
    return [cm_check(h, spec).with_params(pair) for h in handles]


def bernstein_suite(params, spec: Optional[CMCheckSpec] = None) -> List[ClassReport]:
    pair = as_pair(params)
    checks = [(families.M_function(pair), pair.lam),
              (families.beta_bernstein_function(pair), pair.lam_floor + 1),
              (families.x_digamma_gap_function(pair), 1.0)]
    if pair.lam > 1:
        checks.append((families.L_function(pair), pair.lam))
    if pair.b < pair.a - 1.0:
        checks.append((families.F_function(pair), pair.lam))
    return [bernstein_check(f, lam, spec).with_params(pair) for f, lam in checks]


def stieltjes_suite(params, spec: Optional[CMCheckSpec] = None) -> List[ClassReport]:
    pair = as_pair(params)
    checks = [(families.neg_log_M_function(pair), 2.0),
              (families.x_log_M_deriv_function(pair), 3.0),
              (families.gamma_ratio_function(pair), pair.lam_floor + 1.0),
              (families.scaled_M_deriv_function(pair), pair.lam + 4.0),
              (families.scaled_L_function(pair), pair.lam + 4.0),
              (families.gamma_ratio_function(pair), pair.lam + 4.0)]
    return [stieltjes_necessary_check(f, rho, spec).with_params(pair) for f, rho in checks]


def log_convex_suite(params, grid=None) -> List[ClassReport]:
    """w when a-b > 1 and varphi when b < a-1."""
    pair = as_pair(params)
    reports = []
    if pair.lam > 1:
        reports.append(log_convexity_check(w_function(pair), grid).with_params(pair))
    if pair.b < pair.a - 1.0:
        reports.append(log_convexity_check(varphi_function(pair), grid).with_params(pair))
    return reports


def log_cm_suite(params, spec: Optional[CMCheckSpec] = None) -> List[ClassReport]:
    pair = as_pair(params)
    return [log_cm_check(families.neg_log_M_function(pair), spec).with_params(pair),
            log_cm_check(inverse_sinc_exp(), spec)]


def default_closure_instances() -> List[Tuple[str, ScalarFunction, float]]:
    """(check kind, function, order) for the closure properties."""
    left, right = ParamPair(2.5, 0.5), ParamPair(1.7, 1.6)
    one_minus_exp = families.elementary(lambda x: -math.expm1(-x), lambda x: math.exp(-x), '1-e^-x')
    gap = ParamPair(3.0, 1.0)
    inverse_gap = families.elementary(lambda x: 1.0 / (x * families.digamma_gap(gap, x)),
                                      label=f"1/(x(psi gap))[{gap}]")
    stieltjes_atoms = families.elementary(
        lambda x: 1.0 / ((1.0 + x) ** 2 * (2.0 + x)),
        lambda x: -(2.0 * (2.0 + x) + (1.0 + x)) / ((1.0 + x) ** 3 * (2.0 + x) ** 2),
        '(1+x)^-2(2+x)^-1')
    return [
        ('bernstein', families.product(families.M_function(left), families.M_function(right)), 2.1),
        ('bernstein', families.power(one_minus_exp, 2.5), 3.0),
        ('bernstein', families.beta_bernstein_function(ParamPair(3.2, 1.1)), 3.0),
        ('bernstein', families.F_function(gap), 2.0),
        ('bernstein', families.x_digamma_gap_function(gap), 1.0),
        ('cm', inverse_gap, None),
        ('bernstein', families.power(families.M_function(ParamPair(2.0, 1.0)), 1.5), 1.5),
        ('stieltjes', thorin_transform(left, right, 2.1), 10.1),
        ('stieltjes', stieltjes_atoms, 3.0),
        ('bernstein', neg_phi_function(left), 3.0),
    ]


_RUNNERS = {
    'bernstein': lambda f, order, spec: bernstein_check(f, order, spec),
    'stieltjes': lambda f, order, spec: stieltjes_necessary_check(f, order, spec),
    'cm': lambda f, order, spec: cm_check(f, spec),
    'logcm': lambda f, order, spec: log_cm_check(f, spec),
}


def closure_suite(instances: Optional[Sequence[Tuple[str, ScalarFunction, float]]] = None,
                  spec: Optional[CMCheckSpec] = None) -> List[ClassReport]:
    """Run product, power and corollary instances through their class checks."""
    reports = []
    for kind, f, order in (instances or default_closure_instances()):
        if kind not in _RUNNERS:
            raise DomainError(f"unknown closure check kind {kind!r}")
        reports.append(_RUNNERS[kind](f, order, spec))
    return reports


WITNESS_TARGETS = {
    'L': families.L_function,
    'M': families.M_function,
    'F': families.F_function,
    'beta_f': families.beta_bernstein_function,
    'remark': families.remark_function,
}


def witness_suite(params, target: str = 'L', class_text: str = 'B1', grid=None,
                  seed: Optional[int] = None, jitter: float = 0.0) -> List[WitnessReport]:
    """Non-membership search for one named family member."""
    pair = as_pair(params)
    if target not in WITNESS_TARGETS:
        raise DomainError(f"unknown witness target {target!r}; choose from {', '.join(WITNESS_TARGETS)}")
    class_id, order = parse_class(class_text)
    f = WITNESS_TARGETS[target](pair)
    witness = non_membership_witness(f, class_id, order, grid, seed=seed, jitter=jitter)
    return [WitnessReport(f.label, class_id, order, pair, witness)]


SUITES = {
    'cm': cm_suite,
    'bernstein': bernstein_suite,
    'stieltjes': stieltjes_suite,
    'logconvex': log_convex_suite,
    'logcm': log_cm_suite,
}
