import functools

import pytest
from hypothesis import HealthCheck, settings

from dunklpw import band_limited_synthesize

settings.register_profile("repro", derandomize=True, deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repro")


@functools.lru_cache(maxsize=None)
def band_limited(k, R=1.0):
    return band_limited_synthesize(k, R)


@pytest.fixture(scope="session")
def bl_cache():
    return band_limited
