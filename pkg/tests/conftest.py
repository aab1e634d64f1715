import cmath

import numpy as np
import pytest
from hypothesis import strategies as st

from ramprime.hecke import LocalPrimeData

SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]


def make_local(p, r, psi):
    """Valid LocalPrimeData: chi = e^{i psi}, lambda = e^{i psi/2} r with r real."""
    chi = cmath.exp(1j * psi)
    return LocalPrimeData(p, cmath.exp(0.5j * psi) * r, chi)


local_data = st.builds(
    make_local,
    st.sampled_from(SMALL_PRIMES),
    st.floats(-6.0, 6.0),
    st.floats(0.0, 2 * np.pi),
)

nonram_real = st.builds(
    lambda p, r, sign: LocalPrimeData(p, sign * r, 1.0),
    st.sampled_from(SMALL_PRIMES),
    st.floats(2.0001, 8.0),
    st.sampled_from([1.0, -1.0]),
)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
