import numpy as np
import pytest
from hypothesis import settings

from mmcalc.chart import ChartGrid
from mmcalc.geometry import geometry_of
from mmcalc.shapes import Ellipsoid, Sphere, Torus

settings.register_profile("mm", deadline=None, max_examples=25, derandomize=True)
settings.load_profile("mm")


@pytest.fixture(scope="session")
def sphere64():
    return geometry_of(Sphere(1.0), ChartGrid.latlong(64))


@pytest.fixture(scope="session")
def torus64():
    return geometry_of(Torus(2.0, 0.5), ChartGrid.torus(64))


@pytest.fixture(scope="session")
def ellipsoid64():
    return geometry_of(Ellipsoid(1.0, 1.2, 0.8), ChartGrid.latlong(64))


def max_err(a, b, mask=None):
    d = np.abs(np.asarray(a) - np.asarray(b))
    if mask is not None:
        d = d[mask]
    return float(np.max(d))
