import pytest

from ito_fourier.bases import LegendreBasis, TrigonometricBasis
from ito_fourier.models import IntegrationInterval, WeightFunction


@pytest.fixture
def unit():
    return IntegrationInterval(0.0, 1.0)


@pytest.fixture
def legendre(unit):
    return LegendreBasis(unit)


@pytest.fixture
def trig(unit):
    return TrigonometricBasis(unit)


@pytest.fixture(params=['legendre', 'trigonometric'])
def any_basis(request, unit):
    return {'legendre': LegendreBasis, 'trigonometric': TrigonometricBasis}[request.param](unit)


@pytest.fixture
def one():
    return WeightFunction.one()
