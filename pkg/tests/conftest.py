import pytest
from hypothesis import settings

from tau3ternary.arith import sieve_divisor_tables

# First calls compile numba kernels, so per-example deadlines are meaningless.
settings.register_profile("default", deadline=None, derandomize=True)
settings.load_profile("default")


@pytest.fixture(scope="session")
def tables():
    return sieve_divisor_tables(300_000)
