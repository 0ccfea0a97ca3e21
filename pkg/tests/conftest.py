import math

import numpy as np
import pytest
from scipy import stats

# two-sided tail mass beyond 4 sigma of a standard normal
FOUR_SIGMA_TAIL = 2 * stats.norm.sf(4.0)


def within_sigmas(count: int, total: int, p: float, k: float = 4.0) -> bool:
    sigma = math.sqrt(total * p * (1 - p))
    return abs(count - total * p) <= k * sigma


def chi_square_ok(observed, expected_probs) -> bool:
    """Goodness of fit at the 4-sigma level."""
    observed = np.asarray(observed, dtype=float)
    expected = observed.sum() * np.asarray(expected_probs, dtype=float)
    chi2 = float(((observed - expected) ** 2 / expected).sum())
    return chi2 <= stats.chi2.isf(FOUR_SIGMA_TAIL, len(observed) - 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
