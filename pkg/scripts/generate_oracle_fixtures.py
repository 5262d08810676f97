#!/usr/bin/env python3
"""
Regenerate testing/data/special_oracle.txt with mpmath at 50 digits.

Each line is ``function arg... value`` with the value printed to 30
significant digits. The argument lists below are the contract with
testing/test_special_core.py.
"""
import sys
import os
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

import mpmath

import config

mpmath.mp.dps = 50


def _scaled_ratio(x, b, a):
    return (a - b) * mpmath.log(x) + mpmath.loggamma(x + b) - mpmath.loggamma(x + a)


CASES = [
    ('log_gamma', (0.5,), lambda x: mpmath.loggamma(x)),
    ('log_gamma', (1.5,), lambda x: mpmath.loggamma(x)),
    ('log_gamma', (3,), lambda x: mpmath.loggamma(x)),
    ('log_gamma', (10,), lambda x: mpmath.loggamma(x)),
    ('log_gamma', (20,), lambda x: mpmath.loggamma(x)),
    ('log_gamma', (1000,), lambda x: mpmath.loggamma(x)),
    ('log_gamma', (1000000,), lambda x: mpmath.loggamma(x)),
    ('gamma', (0.5,), lambda x: mpmath.gamma(x)),
    ('gamma', (5,), lambda x: mpmath.gamma(x)),
    ('digamma', (0.5,), lambda x: mpmath.digamma(x)),
    ('digamma', (1,), lambda x: mpmath.digamma(x)),
    ('digamma', (1.5,), lambda x: mpmath.digamma(x)),
    ('digamma', (2,), lambda x: mpmath.digamma(x)),
    ('digamma', (10,), lambda x: mpmath.digamma(x)),
    ('trigamma', (0.5,), lambda x: mpmath.psi(1, x)),
    ('trigamma', (1,), lambda x: mpmath.psi(1, x)),
    ('trigamma', (2,), lambda x: mpmath.psi(1, x)),
    ('lower_incomplete_gamma', (1, 2), lambda lam, x: mpmath.gammainc(lam, 0, x)),
    ('lower_incomplete_gamma', (2, 1), lambda lam, x: mpmath.gammainc(lam, 0, x)),
    ('beta', (2, 3), lambda p, q: mpmath.beta(p, q)),
    ('incomplete_beta', (1, 1, 0.3), lambda p, q, x: mpmath.betainc(p, q, 0, x)),
    ('incomplete_beta', (2, 2, 0.5), lambda p, q, x: mpmath.betainc(p, q, 0, x)),
    ('incomplete_beta', (0.5, 0.5, 0.25), lambda p, q, x: mpmath.betainc(p, q, 0, x)),
    ('incomplete_beta', (0.5, 0.5, 0.5), lambda p, q, x: mpmath.betainc(p, q, 0, x)),
    ('log_gamma_ratio', (1, 0.5, 1), lambda x, b, a: mpmath.loggamma(x + b) - mpmath.loggamma(x + a)),
    ('log_gamma_ratio', (1, 1, 2), lambda x, b, a: mpmath.loggamma(x + b) - mpmath.loggamma(x + a)),
    ('log_gamma_ratio', (1000000, 1.1, 3.2), lambda x, b, a: mpmath.loggamma(x + b) - mpmath.loggamma(x + a)),
    ('log_scaled_gamma_ratio', (10000, 0.5, 2.5), lambda x, b, a: _scaled_ratio(x, b, a)),
    ('log_scaled_gamma_ratio', (1000000, 1.1, 3.2), lambda x, b, a: _scaled_ratio(x, b, a)),
    ('log_scaled_gamma_ratio', (100000000, 1.1, 3.2), lambda x, b, a: _scaled_ratio(x, b, a)),
    ('log_scaled_gamma_ratio', (1000000000000, 1.1, 3.2), lambda x, b, a: _scaled_ratio(x, b, a)),
]


def generate(path):
    """Write every case to ``path``."""
    lines = ["# function args... value (30 significant digits, mpmath 50-digit working precision)"]
    for name, args, func in CASES:
        value = func(*[mpmath.mpf(str(a)) for a in args])
        lines.append(' '.join([name] + [repr(a) for a in args] + [mpmath.nstr(value, 30)]))
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write('\n'.join(lines) + '\n')
    return len(CASES)


if __name__ == '__main__':
    target = os.path.join(config.TEST_DATA_DIR, 'special_oracle.txt')
    os.makedirs(config.TEST_DATA_DIR, exist_ok=True)
    count = generate(target)
    print(f"Wrote {count} oracle values to {target}")
