"""
Pytest configuration and fixtures for the gamma-ratio lab test suite.
"""
import os
import sys

import pytest

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import config
from models import ParamPair, QuadratureSpec


@pytest.fixture(scope='session')
def closed_form_pair():
    """(a, b) = (2, 1), where every kernel has an elementary closed form."""
    return ParamPair(2.0, 1.0)


@pytest.fixture(scope='session')
def figure_pair():
    """(a, b) = (1.7, 1.6), the pair with tabulated eta breakpoint values."""
    return ParamPair(1.7, 1.6)


@pytest.fixture(scope='session')
def omega_pairs():
    """The Omega test grid: gaps from 0.05 to 5.25, with a close to 1."""
    return [ParamPair(1.7, 1.6), ParamPair(2.5, 0.5), ParamPair(3.2, 1.1),
            ParamPair(1.05, 1.0), ParamPair(5.5, 0.25)]


@pytest.fixture(scope='session')
def quad_spec():
    """Default quadrature settings."""
    return QuadratureSpec(**config.get_quadrature_defaults())


@pytest.fixture(scope='session')
def oracle_table():
    """Rows (function, args, value) from testing/data/special_oracle.txt."""
    rows = []
    with open(os.path.join(config.TEST_DATA_DIR, 'special_oracle.txt'), encoding='utf-8') as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            parts = line.split()
            rows.append((parts[0], tuple(float(p) for p in parts[1:-1]), float(parts[-1])))
    return rows


@pytest.fixture
def cli_runner():
    """Click test runner."""
    from click.testing import CliRunner
    return CliRunner(mix_stderr=False)
