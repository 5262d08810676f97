#!/usr/bin/env python3
"""
Test runner for the Gamma Ratio Lab test suite.
Runs pytest from the project root; extra arguments are passed through.
"""

import sys
import os
import subprocess


def run_pytest_tests(extra_args):
    """Run tests using pytest."""
    print("Gamma Ratio Lab Test Suite (pytest)")
    print("=" * 60)

    # Get the project root directory (parent of testing directory)
    testing_dir = os.path.dirname(os.path.abspath(__file__))
    project_root = os.path.dirname(testing_dir)

    try:
        result = subprocess.run([sys.executable, '-m', 'pytest', 'testing/'] + list(extra_args),
                                cwd=project_root, timeout=1800)
        return result.returncode == 0
    except subprocess.TimeoutExpired:
        print("Tests timed out")
        return False


def main():
    """Run the suite; pass e.g. -m "not slow" to skip nested quadrature."""
    success = run_pytest_tests(sys.argv[1:])
    print("=" * 60)
    print("All tests passed" if success else "Some tests failed")
    return 0 if success else 1


if __name__ == '__main__':
    sys.exit(main())
