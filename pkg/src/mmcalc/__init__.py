"""Numerical calculus of moving surfaces: geometry, transport, dynamics and checks."""

from .chart import ChartGrid
from .errors import MMError
from .geometry import GeometryState, build_geometry, geometry_of
from .shapes import make_shape

__version__ = "0.1.0"

__all__ = ["ChartGrid", "GeometryState", "MMError", "build_geometry", "geometry_of", "make_shape"]
