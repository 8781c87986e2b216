import numpy as np
import pytest

from cohstab import kernel
from cohstab.grassmann import GeneratorSet


@pytest.fixture
def gens1():
    return GeneratorSet.from_pairs(("zeta",))


@pytest.fixture
def gens2():
    return GeneratorSet.from_pairs(("zeta", "eta"))


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


@pytest.fixture(params=kernel.available_backends())
def each_backend(request):
    """Run the decorated test once per available kernel backend."""
    previous = kernel.get_backend()
    kernel.set_backend(request.param)
    yield request.param
    kernel.set_backend(previous)
