import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import setfuse as sf

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_gaussian(rng, dim=2, mean_scale=1.0, var_lo=0.3, var_hi=1.5):
    """Random well-conditioned Gaussian for property tests."""
    mean = rng.uniform(-mean_scale, mean_scale, dim)
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    cov = q @ np.diag(rng.uniform(var_lo, var_hi, dim)) @ q.T
    return sf.GaussianDensity(mean, 0.5 * (cov + cov.T))


def random_pmf(rng, size, min_prob=0.0):
    """Random normalized pmf of the given support size."""
    raw = rng.uniform(min_prob, 1.0, size)
    return sf.CardinalityPmf(raw / raw.sum())


def binomial_pmf(k, p):
    """Binomial count pmf as a CardinalityPmf (scipy oracle, renormalized)."""
    from scipy.stats import binom

    raw = binom.pmf(np.arange(k + 1), k, p)
    return sf.CardinalityPmf(raw / raw.sum())
