import numpy as np
import pytest

from polyan import config
from polyan.tools.polycore import CPoly, PolyAnalytic, RationalHolo


@pytest.fixture(autouse=True)
def default_tolerances():
    """Every test starts from the documented defaults."""
    previous = config.DEFAULTS
    config.activate(config.Tolerances())
    yield config.DEFAULTS
    config.activate(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def one_minus_zzbar():
    """1 - z conj(z)."""
    return PolyAnalytic.constant(1.0) - PolyAnalytic.z() * PolyAnalytic.zbar()


@pytest.fixture
def unimodular_quotient():
    """(conj(z) - 1) / (z - 1): modulus one off z = 1."""
    den = CPoly(1, {(1,): 1.0, (0,): -1.0})
    return PolyAnalytic(
        1,
        (2,),
        {
            (1,): RationalHolo(CPoly.constant(1.0, 1), den),
            (0,): RationalHolo(CPoly.constant(-1.0, 1), den),
        },
    )
