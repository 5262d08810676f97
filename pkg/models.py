"""
Data models shared by the numerics modules: parameter pairs, function
handles, quadrature settings and check reports.
"""
import math
from dataclasses import dataclass, field, asdict, replace
from enum import Enum
from typing import Callable, Optional, Tuple, Dict, Any

import numpy as np

import config
from errors import DomainError, MissingDerivativeError

MACHINE_EPS = float(np.finfo(float).eps)


def require_finite(name: str, value) -> float:
    """Convert to float and reject NaN / infinities."""
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a real number, got {value!r}")
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class Precision:
    """
    Stopping rule of the series and continued fractions in special_core.

    A series stops once a term falls under max(abs_tol, rel_tol * |sum|);
    a continued fraction once its convergent ratio is within rel_tol of 1.
    """
    abs_tol: float = float(np.finfo(float).tiny)
    rel_tol: float = MACHINE_EPS

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("precision tolerances must be positive")
        if self.rel_tol < MACHINE_EPS:
            raise DomainError(f"rel_tol below machine epsilon: {self.rel_tol!r}")

    def converged(self, term: float, total: float) -> bool:
        return abs(term) < max(self.abs_tol, self.rel_tol * abs(total))


# ============================================================================
# PARAMETERS
# ============================================================================

@dataclass(frozen=True)
class ParamPair:
    """The pair (a, b) with 0 < b < a."""
    a: float
    b: float

    def __post_init__(self):
        a = require_finite('a', self.a)
        b = require_finite('b', self.b)
        if not 0 < b < a:
            raise DomainError(f"parameters must satisfy 0 < b < a, got a={a!r}, b={b!r}")
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'b', b)

    @property
    def lam(self) -> float:
        """The gap a - b."""
        return self.a - self.b

    @property
    def lam_floor(self) -> int:
        """Integer part [a - b]."""
        return math.floor(self.a - self.b)

    @property
    def in_omega(self) -> bool:
        return self.a > 1

    @classmethod
    def parse(cls, text: str) -> 'ParamPair':
        """Parse an ``"a:b"`` pair."""
        parts = text.strip().split(':')
        if len(parts) != 2:
            raise DomainError(f"parameter pair must look like 'a:b', got {text!r}")
        return cls(require_finite('a', parts[0]), require_finite('b', parts[1]))

    def as_dict(self) -> Dict[str, float]:
        return {'a': self.a, 'b': self.b}

    def __str__(self):
        return f"{self.a:g}:{self.b:g}"


def in_omega(a: float, b: float) -> bool:
    """Membership of (a, b) in the region 0 < b < a, a > 1."""
    return 0 < b < a and a > 1


@dataclass(frozen=True)
class OmegaParams:
    """A ParamPair that additionally satisfies a > 1."""
    pair: ParamPair

    def __post_init__(self):
        if not self.pair.in_omega:
            raise DomainError(f"parameters ({self.pair}) are outside the region a > 1")

    @classmethod
    def of(cls, a: float, b: float) -> 'OmegaParams':
        return cls(ParamPair(a, b))

    @classmethod
    def parse(cls, text: str) -> 'OmegaParams':
        return cls(ParamPair.parse(text))

    @property
    def a(self) -> float:
        return self.pair.a

    @property
    def b(self) -> float:
        return self.pair.b

    @property
    def lam(self) -> float:
        return self.pair.lam

    def __str__(self):
        return str(self.pair)


def as_pair(params) -> ParamPair:
    """Accept either a ParamPair or OmegaParams."""
    return params.pair if isinstance(params, OmegaParams) else params


@dataclass(frozen=True, eq=False)
class Breakpoints:
    """Kink points {k+b, k+a : k = 0, 1, ...} up to an upper bound."""
    points: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        pts = np.unique(np.asarray(self.points, dtype=float).ravel())
        object.__setattr__(self, 'points', pts)

    @classmethod
    def for_pair(cls, params, upper: float) -> 'Breakpoints':
        pair = as_pair(params)
        count = int(math.floor(upper)) + 2
        ks = np.arange(count, dtype=float)
        pts = np.concatenate([ks + pair.b, ks + pair.a])
        return cls(pts[pts <= upper])

    @property
    def upper(self) -> float:
        return float(self.points[-1]) if len(self.points) else 0.0

    def within(self, lower: float, upper: float) -> np.ndarray:
        pts = self.points
        return pts[(pts > lower) & (pts < upper)]

    def __iter__(self):
        return iter(float(p) for p in self.points)

    def __len__(self):
        return len(self.points)


# ============================================================================
# FUNCTION HANDLES
# ============================================================================

class Growth(str, Enum):
    """Growth classes understood by the quadrature engine."""
    BOUNDED = 'bounded'   # |f(t)| <= B
    LINEAR = 'linear'     # |f(t)| <= B (1 + t)
    POWER = 'power'       # |f(t)| <= B t^(exponent - 1)


@dataclass(frozen=True)
class GrowthClass:
    """
    Declared growth of an integrand.

    ``slope`` / ``intercept`` optionally give the asymptotic mean trend
    ``slope*t + intercept``; ``deviation`` bounds |f(t) - trend|, divided
    by (1 + t) for linear growth.
    A ``period`` says the deviation oscillates around the trend with that
    period, which sharpens the residual estimate of algebraic tails.

    With ``periodic_from`` set, f(t + period) = f(t) + increment(t) holds
    for t >= periodic_from, with ``increment`` (vectorised, zero when
    omitted) periodic there; algebraic tails are then summed exactly.
    """
    kind: Growth
    bound: float
    exponent: float = 1.0
    slope: Optional[float] = None
    intercept: float = 0.0
    deviation: float = 0.0
    period: Optional[float] = None
    periodic_from: Optional[float] = None
    increment: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if not self.bound >= 0:
            raise DomainError("growth bound must be non-negative")
        if self.kind is Growth.POWER and not self.exponent > 0:
            raise DomainError("power growth needs a positive exponent")
        if self.periodic_from is not None and not (self.period and self.period > 0):
            raise DomainError("a periodic continuation needs a positive period")

    @property
    def has_trend(self) -> bool:
        return self.slope is not None

    @property
    def quasi_periodic(self) -> bool:
        return self.periodic_from is not None

    def scaled(self, factor: float) -> 'GrowthClass':
        """Growth of factor*f."""
        increment = None
        if self.increment is not None:
            increment = lambda t, g=self.increment: factor * g(t)
        return replace(self, bound=abs(factor) * self.bound,
                       slope=None if self.slope is None else factor * self.slope,
                       intercept=factor * self.intercept,
                       deviation=abs(factor) * self.deviation, increment=increment)

    @classmethod
    def bounded(cls, bound: float) -> 'GrowthClass':
        return cls(Growth.BOUNDED, bound, slope=0.0, deviation=bound)

    @classmethod
    def constant(cls, value: float) -> 'GrowthClass':
        return cls(Growth.BOUNDED, abs(value), slope=0.0, intercept=value,
                   period=1.0, periodic_from=0.0)

    @classmethod
    def linear(cls, bound: float, slope: Optional[float] = None,
               intercept: float = 0.0, deviation: float = 0.0,
               period: Optional[float] = None, periodic_from: Optional[float] = None,
               increment: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> 'GrowthClass':
        return cls(Growth.LINEAR, bound, slope=slope, intercept=intercept,
                   deviation=deviation, period=period, periodic_from=periodic_from,
                   increment=increment)

    @classmethod
    def power(cls, bound: float, exponent: float) -> 'GrowthClass':
        return cls(Growth.POWER, bound, exponent=exponent)


@dataclass(frozen=True)
class ScalarFunction:
    """
    A real function of one positive real, optionally with its analytic
    first derivative.

    ``vectorized`` marks callables that accept numpy arrays.
    """
    eval: Callable[[Any], Any]
    deriv: Optional[Callable[[Any], Any]] = None
    label: str = ''
    growth: Optional[GrowthClass] = None
    vectorized: bool = False

    def __call__(self, x):
        return self.eval(x)

    def evaluate(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if self.vectorized:
            return np.broadcast_to(np.asarray(self.eval(xs), dtype=float), xs.shape).copy()
        return np.fromiter((self.eval(float(x)) for x in xs.ravel()),
                           dtype=float, count=xs.size).reshape(xs.shape)

    def derivative(self, x):
        if self.deriv is None:
            raise MissingDerivativeError(self.label)
        return self.deriv(x)

    @property
    def has_deriv(self) -> bool:
        return self.deriv is not None

    def scaled(self, factor: float) -> 'ScalarFunction':
        """Positive multiple c*f (keeps every class verdict)."""
        deriv = None if self.deriv is None else (lambda x, d=self.deriv: factor * d(x))
        growth = None if self.growth is None else self.growth.scaled(factor)
        return ScalarFunction(lambda x, f=self.eval: factor * f(x), deriv,
                              f"{factor:g}*{self.label}", growth, self.vectorized)


# ============================================================================
# QUADRATURE SETTINGS AND REPORTS
# ============================================================================

@dataclass(frozen=True)
class TruncationPolicy:
    """Upper limits for semi-infinite integrals."""
    decades: float = config.TRUNCATION_DECADES
    max_upper: float = config.MAX_UPPER
    stieltjes_upper: float = config.STIELTJES_UPPER

    def initial_upper(self, decay_rate: float) -> float:
        return min(self.decades / decay_rate, self.max_upper)


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Tolerances, breakpoints and truncation rule for one integral.

    ``abs_tol`` = 0 asks for relative accuracy only, which QUADPACK
    accepts when rel_tol is at least 50 machine epsilons.
    """
    abs_tol: float = config.ABS_TOL
    rel_tol: float = config.REL_TOL
    max_subdivisions: int = config.MAX_SUBDIVISIONS
    breakpoints: Breakpoints = field(default_factory=Breakpoints)
    truncation: TruncationPolicy = field(default_factory=TruncationPolicy)

    def __post_init__(self):
        if not (self.abs_tol >= 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.abs_tol == 0 and self.rel_tol < 50.0 * MACHINE_EPS:
            raise DomainError(f"a relative-only target needs rel_tol >= {50.0 * MACHINE_EPS:.3g}")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")

    def with_breakpoints(self, breakpoints: Breakpoints) -> 'QuadratureSpec':
        return replace(self, breakpoints=breakpoints)

    def tightened(self, factor: float = 0.5) -> 'QuadratureSpec':
        """Both tolerances scaled by ``factor``."""
        return replace(self, abs_tol=self.abs_tol * factor, rel_tol=self.rel_tol * factor)

    def relative(self) -> 'QuadratureSpec':
        """These settings without the absolute floor."""
        return replace(self, abs_tol=0.0)

    def target(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


@dataclass(frozen=True)
class IdentityPoint:
    x: float
    lhs: float
    rhs: float
    rel_err: float


@dataclass(frozen=True)
class IdentityCheckReport:
    """Comparison of two evaluation paths of one identity on a grid."""
    identity_id: str
    params: ParamPair
    grid: Tuple[float, ...]
    max_rel_err: float
    worst_point: float
    passed: bool
    tolerance: float
    points: Tuple[IdentityPoint, ...] = ()

    def __post_init__(self):
        if self.passed != (self.max_rel_err <= self.tolerance):
            raise ValueError("passed must agree with max_rel_err <= tolerance")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.identity_id,
            'params': self.params.as_dict(),
            'passed': self.passed,
            'max_rel_err': self.max_rel_err,
            'worst_point': self.worst_point,
            'details': {
                'tolerance': self.tolerance,
                'grid': list(self.grid),
                'points': [asdict(p) for p in self.points],
            },
        }


class ClassId(str, Enum):
    CM = 'CM'
    B_LAMBDA = 'B_lambda'
    S_RHO_NECESSARY = 'S_rho_necessary'
    LOGCM = 'LOGCM'
    LOGCONVEX = 'LOGCONVEX'


@dataclass(frozen=True)
class Witness:
    """Point, difference order and step at which a sign condition fails."""
    x: float
    n: int
    h: float
    value: float = 0.0
    condition: str = ''


def default_step(order: int) -> Callable[[float], float]:
    return lambda x: x / (2 * order)


@dataclass(frozen=True)
class CMCheckSpec:
    """Difference order, grid and step rule of a sign-pattern check."""
    max_order: int = config.CM_ORDER
    grid: Tuple[float, ...] = tuple(np.geomspace(0.05, 50.0, 25))
    step: Optional[Callable[[float], float]] = None
    rounding_scale: float = config.ROUNDING_SCALE

    def __post_init__(self):
        if self.max_order < 1:
            raise DomainError("max_order must be at least 1")
        if not self.grid or min(self.grid) <= 0:
            raise DomainError("check grid must be a non-empty set of positive points")
        object.__setattr__(self, 'grid', tuple(float(x) for x in self.grid))

    def h(self, x: float) -> float:
        step = self.step or default_step(self.max_order)
        return step(x)

    def with_grid(self, grid) -> 'CMCheckSpec':
        return CMCheckSpec(self.max_order, tuple(grid), self.step, self.rounding_scale)


@dataclass(frozen=True)
class ClassReport:
    """Outcome of a class-membership test."""
    class_id: ClassId
    label: str
    order: Optional[float]
    worst_violation: float
    passed: bool
    witness: Optional[Witness] = None
    within_noise: bool = False
    orders_tested: int = 0
    details: str = ''
    params: Optional[ParamPair] = None

    def __post_init__(self):
        if (self.witness is None) != self.passed:
            raise ValueError("a witness is present exactly when the check fails")

    def with_params(self, params) -> 'ClassReport':
        return ClassReport(self.class_id, self.label, self.order, self.worst_violation,
                           self.passed, self.witness, self.within_noise, self.orders_tested,
                           self.details, as_pair(params))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.class_id.value,
            'params': None if self.params is None else self.params.as_dict(),
            'label': self.label,
            'order': self.order,
            'passed': self.passed,
            'worst_violation': self.worst_violation,
            'worst_point': None if self.witness is None else self.witness.x,
            'details': {
                'within_noise': self.within_noise,
                'orders_tested': self.orders_tested,
                'witness': None if self.witness is None else asdict(self.witness),
                'note': self.details,
            },
        }


@dataclass(frozen=True)
class PropertyReport:
    """
    Pointwise property of a kernel (nonnegativity, a recurrence, an
    inequality) sampled on a grid; ``margin`` is the smallest slack seen.
    """
    check_id: str
    label: str
    params: Optional[ParamPair]
    margin: float
    worst_point: float
    passed: bool
    tolerance: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.check_id,
            'params': None if self.params is None else self.params.as_dict(),
            'passed': self.passed,
            'worst_violation': max(0.0, -self.margin),
            'worst_point': self.worst_point,
            'details': {'label': self.label, 'margin': self.margin,
                        'tolerance': self.tolerance},
        }


@dataclass(frozen=True)
class WitnessReport:
    """Result of a non-membership search; passes when a witness is found."""
    label: str
    class_id: ClassId
    order: float
    params: Optional[ParamPair]
    witness: Optional[Witness]

    @property
    def found(self) -> bool:
        return self.witness is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': f"WITNESS:{self.class_id.value}",
            'params': None if self.params is None else self.params.as_dict(),
            'passed': self.found,
            'worst_violation': 0.0 if self.witness is None else abs(self.witness.value),
            'worst_point': None if self.witness is None else self.witness.x,
            'details': {
                'label': self.label,
                'order': self.order,
                'witness': None if self.witness is None else asdict(self.witness),
                'note': 'non-membership confirmed' if self.found else 'inconclusive',
            },
        }
