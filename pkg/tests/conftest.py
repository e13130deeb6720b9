import math

import pytest

from latticewedge.basis import Basis, algorithm1
from latticewedge.lattice import incident_params
from latticewedge.surface import Surface
from latticewedge.transformant import Transformant

K_REAL = 0.5
K_LOSSY = 0.5 + 0.01j
PHI = math.pi / 4


@pytest.fixture(scope="session")
def surface():
    return Surface(K_REAL)


@pytest.fixture(scope="session")
def periods(surface):
    return surface.periods(4096)


@pytest.fixture(scope="session")
def basis(surface, periods):
    return Basis(surface, algorithm1(surface, periods))


@pytest.fixture(scope="session")
def trans():
    S = Surface(K_LOSSY)
    return Transformant(Basis(S, algorithm1(S)), incident_params(K_LOSSY, PHI))


@pytest.fixture(scope="session")
def trans_real(basis):
    return Transformant(basis, incident_params(K_REAL, PHI))
