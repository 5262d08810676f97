"""
The named function families and their analytic derivatives.

M_{a,b}(x) = x^(a-b) Gamma(x+b)/Gamma(x+a), log M, (log M)', L = x(1 - M),
F = x^(a-b-1)/(psi(x+a) - psi(x+b)), the incomplete-Beta Bernstein
function and g_lambda = M_{lambda,1}. Each family is available as plain
functions and as ScalarFunction handles for the class checks.
"""
import math
import logging
from typing import Callable, Dict

import kernels
from errors import DomainError
from models import ParamPair, ScalarFunction, as_pair, require_finite
from special_core import (log_gamma_ratio, log_scaled_gamma_ratio, digamma, trigamma,
                          incomplete_beta, beta)

logger = logging.getLogger(__name__)


def _positive(x) -> float:
    x = require_finite('x', x)
    if x <= 0:
        raise DomainError(f"x must be > 0, got {x!r}")
    return x


# ============================================================================
# M AND ITS LOGARITHM
# ============================================================================

def log_M(params, x) -> float:
    """log M = (a-b) log x + log Gamma(x+b) - log Gamma(x+a), never log(M)."""
    pair = as_pair(params)
    x = _positive(x)
    return log_scaled_gamma_ratio(x, pair.b, pair.a)


def M(params, x) -> float:
    """M_{a,b}(x) = x^(a-b) Gamma(x+b) / Gamma(x+a)."""
    return math.exp(log_M(params, x))


def M_reversed(params, x) -> float:
    """M_{b,a}(x) = 1 / M_{a,b}(x)."""
    pair = as_pair(params)
    x = _positive(x)
    return math.exp(-log_M(pair, x))


def g_lambda(lam, x) -> float:
    """g_lambda(x) = x^lambda Gamma(x) / Gamma(x+lambda) = M_{lambda,1}(x)."""
    return M(ParamPair(lam, 1.0), x)


def digamma_gap(params, x) -> float:
    """psi(x+a) - psi(x+b)."""
    pair = as_pair(params)
    x = _positive(x)
    return digamma(x + pair.a) - digamma(x + pair.b)


def log_M_deriv(params, x) -> float:
    """(log M)'(x) = (a-b)/x + psi(x+b) - psi(x+a)."""
    pair = as_pair(params)
    x = _positive(x)
    return pair.lam / x - digamma_gap(pair, x)


def log_M_second(params, x) -> float:
    """(log M)''(x) = -(a-b)/x^2 + psi'(x+b) - psi'(x+a)."""
    pair = as_pair(params)
    x = _positive(x)
    return -pair.lam / (x * x) + trigamma(x + pair.b) - trigamma(x + pair.a)


def M_deriv(params, x) -> float:
    """M' = M (log M)'."""
    return M(params, x) * log_M_deriv(params, x)


def M_second(params, x) -> float:
    """M'' = M ((log M)'' + (log M)'^2)."""
    slope = log_M_deriv(params, x)
    return M(params, x) * (log_M_second(params, x) + slope * slope)


# ============================================================================
# L AND F
# ============================================================================

def L(params, x) -> float:
    """L_{a,b}(x) = x (1 - M(x)), with 1 - M taken from expm1(log M)."""
    x = _positive(x)
    return -x * math.expm1(log_M(params, x))


def L_deriv(params, x) -> float:
    """L' = 1 - M - x M'."""
    x = _positive(x)
    return -math.expm1(log_M(params, x)) - x * M_deriv(params, x)


def _require_f_domain(pair: ParamPair):
    if not pair.b < pair.a - 1.0:
        raise DomainError(f"F needs 0 < b < a - 1, got ({pair})")


def F(params, x) -> float:
    """F_{a,b}(x) = x^(a-b-1) / (psi(x+a) - psi(x+b)), for 0 < b < a-1."""
    pair = as_pair(params)
    _require_f_domain(pair)
    x = _positive(x)
    return x ** (pair.lam - 1.0) / digamma_gap(pair, x)


def F_deriv(params, x) -> float:
    """Quotient rule with D = psi(x+a) - psi(x+b) and D' from trigamma."""
    pair = as_pair(params)
    _require_f_domain(pair)
    x = _positive(x)
    gap = digamma_gap(pair, x)
    gap_prime = trigamma(x + pair.a) - trigamma(x + pair.b)
    scale = x ** (pair.lam - 2.0)
    return scale * ((pair.lam - 1.0) * gap - x * gap_prime) / (gap * gap)


# ============================================================================
# INCOMPLETE-BETA BERNSTEIN FUNCTION
# ============================================================================

def beta_bernstein(params, x) -> float:
    """
    f(x) = int_0^x e^(-bt) (1 - e^-t)^(a-b-1) dt
         = B(b, a-b) - B(b, a-b, e^-x)

    evaluated as B(a-b, b, 1 - e^-x) so small x keeps full precision.
    """
    pair = as_pair(params)
    x = _positive(x)
    return incomplete_beta(pair.lam, pair.b, -math.expm1(-x))


def beta_bernstein_deriv(params, x) -> float:
    """f'(x) = e^(-bx) (1 - e^-x)^(a-b-1)."""
    pair = as_pair(params)
    x = _positive(x)
    return math.exp(-pair.b * x + (pair.lam - 1.0) * math.log(-math.expm1(-x)))


def beta_bernstein_limit(params) -> float:
    """f(inf) = B(b, a-b)."""
    pair = as_pair(params)
    return beta(pair.b, pair.lam)


# ============================================================================
# HANDLES AND COMBINATORS
# ============================================================================

def _handle(value, deriv, name: str, pair: ParamPair) -> ScalarFunction:
    return ScalarFunction(lambda x: value(pair, x), lambda x: deriv(pair, x), f"{name}[{pair}]")


def M_function(params) -> ScalarFunction:
    return _handle(M, M_deriv, 'M', as_pair(params))


def log_M_function(params) -> ScalarFunction:
    return _handle(log_M, log_M_deriv, 'logM', as_pair(params))


def L_function(params) -> ScalarFunction:
    return _handle(L, L_deriv, 'L', as_pair(params))


def F_function(params) -> ScalarFunction:
    pair = as_pair(params)
    _require_f_domain(pair)
    return _handle(F, F_deriv, 'F', pair)


def beta_bernstein_function(params) -> ScalarFunction:
    return _handle(beta_bernstein, beta_bernstein_deriv, 'beta_f', as_pair(params))


def neg_log_M_function(params) -> ScalarFunction:
    """-log M, a member of S_2 on Omega."""
    pair = as_pair(params)
    return ScalarFunction(lambda x: -log_M(pair, x), lambda x: -log_M_deriv(pair, x),
                          f"-logM[{pair}]")


def x_log_M_deriv_function(params) -> ScalarFunction:
    """x (log M)'(x), a member of S_3 on Omega."""
    pair = as_pair(params)
    return ScalarFunction(lambda x: x * log_M_deriv(pair, x),
                          lambda x: log_M_deriv(pair, x) + x * log_M_second(pair, x),
                          f"x(logM)'[{pair}]")


def gamma_ratio_function(params) -> ScalarFunction:
    """Gamma(x+b)/Gamma(x+a) = M(x)/x^(a-b)."""
    pair = as_pair(params)

    def value(x):
        return math.exp(log_gamma_ratio(_positive(x), pair.b, pair.a))

    return ScalarFunction(value, lambda x: -value(x) * digamma_gap(pair, x),
                          f"GammaRatio[{pair}]")


def scaled_M_deriv_function(params) -> ScalarFunction:
    """x^(1-(a-b)) M'(x) with its derivative."""
    pair = as_pair(params)
    lam = pair.lam

    def value(x):
        return x ** (1.0 - lam) * M_deriv(pair, x)

    def deriv(x):
        return (1.0 - lam) * x ** (-lam) * M_deriv(pair, x) + x ** (1.0 - lam) * M_second(pair, x)

    return ScalarFunction(value, deriv, f"x^(1-l)M'[{pair}]")


def scaled_L_function(params) -> ScalarFunction:
    """L(x) / x^(a-b+1) with its derivative."""
    pair = as_pair(params)
    order = pair.lam + 1.0

    def value(x):
        return L(pair, x) / x ** order

    def deriv(x):
        return L_deriv(pair, x) / x ** order - order * L(pair, x) / x ** (order + 1.0)

    return ScalarFunction(value, deriv, f"L/x^(l+1)[{pair}]")


def x_digamma_gap_function(params) -> ScalarFunction:
    """x (psi(x+a) - psi(x+b))."""
    pair = as_pair(params)

    def deriv(x):
        return digamma_gap(pair, x) + x * (trigamma(x + pair.a) - trigamma(x + pair.b))

    return ScalarFunction(lambda x: x * digamma_gap(pair, x), deriv, f"x(psi gap)[{pair}]")


def remark_function(params) -> ScalarFunction:
    """x^-[a-b] e^(-bx) (1 - e^-x)^(a-b-1), outside every S_mu scaled class."""
    pair = as_pair(params)
    shift = pair.lam_floor

    def value(x):
        x = _positive(x)
        return math.exp(-shift * math.log(x) - pair.b * x + (pair.lam - 1.0) * math.log(-math.expm1(-x)))

    def deriv(x):
        x = _positive(x)
        return value(x) * (-shift / x - pair.b + (pair.lam - 1.0) / math.expm1(x))

    return ScalarFunction(value, deriv, f"remark[{pair}]")


def product(f: ScalarFunction, g: ScalarFunction) -> ScalarFunction:
    """f g with (f g)' = f' g + f g'."""
    deriv = None
    if f.has_deriv and g.has_deriv:
        deriv = lambda x: f.deriv(x) * g(x) + f(x) * g.deriv(x)
    return ScalarFunction(lambda x: f(x) * g(x), deriv, f"{f.label}*{g.label}")


def power(f: ScalarFunction, exponent: float) -> ScalarFunction:
    """f^p for positive f, with (f^p)' = p f^(p-1) f'."""
    deriv = None
    if f.has_deriv:
        deriv = lambda x: exponent * f(x) ** (exponent - 1.0) * f.deriv(x)
    return ScalarFunction(lambda x: f(x) ** exponent, deriv, f"({f.label})^{exponent:g}")


def elementary(value: Callable, deriv: Callable = None, label: str = '') -> ScalarFunction:
    """Handle for a closed-form test function."""
    return ScalarFunction(value, deriv, label)


# ============================================================================
# REGISTRY
# ============================================================================

def _registry() -> Dict[str, Callable]:
    return {
        'M': M,
        'logM': log_M,
        'dlogM': log_M_deriv,
        'L': L,
        'F': F,
        'beta_f': beta_bernstein,
        'Phi': kernels.phi,
        'PhiPrime': kernels.phi_prime,
        'xi': kernels.xi,
        'eta': kernels.eta,
        'Theta': kernels.theta,
        'w': kernels.w_kernel,
        'wPrime': kernels.w_prime,
        'W': kernels.W_kernel,
        'varphi': kernels.varphi,
        'q': kernels.q_of_t,
        'p': kernels.p_of_t,
        'g_lambda': lambda pair, x: g_lambda(pair.a, x),
    }


FUNCTION_NAMES = ('M', 'logM', 'dlogM', 'L', 'F', 'beta_f', 'Phi', 'PhiPrime', 'xi', 'eta',
                  'Theta', 'w', 'wPrime', 'W', 'varphi', 'q', 'p', 'g_lambda')

# Kernels defined only on Omega
OMEGA_FUNCTIONS = frozenset({'xi', 'eta', 'Theta', 'q'})


def evaluate(name: str, params, x) -> float:
    """
    Evaluate a published function by name.

    ``g_lambda`` takes lambda from the pair's ``a`` (the pair is (lambda, 1)).
    """
    if name not in FUNCTION_NAMES:
        raise DomainError(f"unknown function {name!r}; choose from {', '.join(FUNCTION_NAMES)}")
    return float(_registry()[name](params, x))
