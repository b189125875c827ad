import os
import sys

import numpy as np
import pytest

# Add the parent directory to the path so we can import from tstat
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from tstat.distributions import CATALOG, make_distribution  # noqa: E402

SYMMETRIC = ['rademacher', 'uniform', 'student_t3', 'student_t5', 'pareto_tail']


@pytest.fixture
def catalog():
    return CATALOG


@pytest.fixture
def small_grid():
    """Multiples of 0.05 on [-6, 6], plus +/-2 and 0 exactly."""
    return np.round(np.arange(-120, 121) * 0.05, 10)


@pytest.fixture
def rademacher():
    return make_distribution('rademacher')


@pytest.fixture
def exponential():
    return make_distribution('centered_exponential')


@pytest.fixture(autouse=True)
def _quiet_environment(monkeypatch, tmp_path):
    monkeypatch.setenv('TSTAT_LOG_TO_FILE', 'false')
    monkeypatch.setenv('TSTAT_OUTPUT_DIR', str(tmp_path / 'results'))
