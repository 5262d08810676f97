"""
Configuration settings for the gamma-ratio lab.

Every setting can be overridden through the environment (a ``.env`` file is
loaded by the CLI before this module is imported).
"""
import os
import json

# Base Directories
BASE_DIR = os.path.dirname(os.path.abspath(__file__))
TEST_DATA_DIR = os.path.join(BASE_DIR, 'testing', 'data')

# Logging Configuration
LOG_LEVEL = os.environ.get('GAMMA_LAB_LOG_LEVEL', 'WARNING').upper()
LOG_FILE = os.environ.get('GAMMA_LAB_LOG_FILE', '')
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_MAX_BYTES = int(os.environ.get('GAMMA_LAB_LOG_MAX_BYTES', str(1024 * 1024)))
LOG_BACKUP_COUNT = int(os.environ.get('GAMMA_LAB_LOG_BACKUP_COUNT', '3'))

# Quadrature Configuration
ABS_TOL = float(os.environ.get('GAMMA_LAB_ABS_TOL', '1e-15'))
REL_TOL = float(os.environ.get('GAMMA_LAB_REL_TOL', '1e-12'))
MAX_SUBDIVISIONS = int(os.environ.get('GAMMA_LAB_MAX_SUBDIVISIONS', '4000'))
# Laplace integrals start at upper limit TRUNCATION_DECADES / x
TRUNCATION_DECADES = float(os.environ.get('GAMMA_LAB_TRUNCATION_DECADES', '40'))
MAX_UPPER = float(os.environ.get('GAMMA_LAB_MAX_UPPER', '1e6'))
# Algebraic (Stieltjes) tails are cut here and corrected analytically
STIELTJES_UPPER = float(os.environ.get('GAMMA_LAB_STIELTJES_UPPER', '1e5'))

# Identity Catalog Configuration
IDENTITY_TOL = float(os.environ.get('GAMMA_LAB_IDENTITY_TOL', '1e-8'))
NESTED_IDENTITY_TOL = float(os.environ.get('GAMMA_LAB_NESTED_IDENTITY_TOL', '1e-6'))

# Class Check Configuration
CM_ORDER = int(os.environ.get('GAMMA_LAB_CM_ORDER', '8'))
# Multiplier on the 2^n * ulp * max|g| rounding budget
ROUNDING_SCALE = float(os.environ.get('GAMMA_LAB_ROUNDING_SCALE', '64'))

# CLI Configuration
JOBS = int(os.environ.get('GAMMA_LAB_JOBS', '1'))
REPORT_VERSION = 1
FLOAT_DIGITS = 17

# Per-identity tolerance overrides
# Example: export GAMMA_LAB_TOLERANCES='{"R10": 1e-5, "R6": 1e-9}'
TOLERANCE_OVERRIDES = {}
if os.environ.get('GAMMA_LAB_TOLERANCES'):
    try:
        TOLERANCE_OVERRIDES = json.loads(os.environ.get('GAMMA_LAB_TOLERANCES'))
    except json.JSONDecodeError:
        # Use defaults if invalid JSON
        pass


def get_quadrature_defaults():
    """
    Get the default quadrature settings.

    Returns:
        dict: keyword arguments accepted by ``models.QuadratureSpec``
    """
    return {
        'abs_tol': ABS_TOL,
        'rel_tol': REL_TOL,
        'max_subdivisions': MAX_SUBDIVISIONS,
    }


def get_identity_tolerance(identity_id, nested=False):
    """
    Get the pass/fail tolerance of a catalog identity.

    Args:
        identity_id (str): catalog id such as ``'R4'``
        nested (bool): whether the identity uses nested quadrature

    Returns:
        float: maximum admissible relative error
    """
    if identity_id in TOLERANCE_OVERRIDES:
        return float(TOLERANCE_OVERRIDES[identity_id])
    return NESTED_IDENTITY_TOL if nested else IDENTITY_TOL
