import numpy as np
import pytest

from dbspace import backend, hb


@pytest.fixture(params=backend.available())
def each_backend(request):
    """Run the test once per available kernel backend."""
    prev = backend.use(request.param)
    yield request.param
    backend.use(prev)


@pytest.fixture(params=hb.FIXTURE_NAMES)
def fixture_E(request):
    return hb.builtin_fixture(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
