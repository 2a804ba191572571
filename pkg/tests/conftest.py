import math

import pytest

from bykov._backend import available
from bykov.maps import ReturnMap
from bykov.model import ModelParams

TORUS_PARAMS = ModelParams(1.1, 0.9, 1.0, 1.1, 0.9, 1.0, A=0.01, lam=0.002)
K_HORSESHOE = 4.0 * math.pi / math.log(2.0)


@pytest.fixture(params=available())
def backend(request):
    return request.param


@pytest.fixture
def torus_map():
    return ReturnMap.from_params(TORUS_PARAMS)


@pytest.fixture
def horseshoe_map():
    return ReturnMap.from_constants(2.0, K_HORSESHOE, 0.01, 0.009)
