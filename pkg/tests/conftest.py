import numpy as np
import pytest

from qclt.arith import build_sieve


@pytest.fixture(scope="session")
def tables_1e4():
    return build_sieve(10**4)


@pytest.fixture(scope="session")
def tables_1e5():
    return build_sieve(10**5)


@pytest.fixture(scope="session")
def tables_1e6():
    return build_sieve(10**6)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260809)
