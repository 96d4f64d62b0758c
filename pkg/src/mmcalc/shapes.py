"""Analytic shape catalog and chart embedding.

Sphere-like shapes (sphere, ellipsoid, radial graph) live on lat-long charts
with ``u`` the colatitude and ``v`` the longitude. The torus uses ``u`` for
the angle around the symmetry axis and ``v`` for the angle on the tube, which
makes ``S_u x S_v`` point outward. Graph patches use ``(u, v) = (x, y)``.

Each shape also exposes its exact mean and Gaussian curvature where a closed
form exists (outward normal, so a sphere of radius r has H = -2/r).
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import legendre

from .chart import ChartGrid
from .errors import ChartError, TopologyError, UnknownShapeError


def _unit(U, V):
    return np.stack([np.sin(U) * np.cos(V), np.sin(U) * np.sin(V), np.cos(U)], axis=-1)


@dataclass(frozen=True)
class Sphere:
    radius: float = 1.0
    topology = "sphere"

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("sphere radius must be positive")

    def position(self, U, V):
        return self.radius * _unit(U, V)

    def exact_curvature(self, U, V):
        r = self.radius
        return np.full(U.shape, -2.0 / r), np.full(U.shape, 1.0 / r**2)


@dataclass(frozen=True)
class Ellipsoid:
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    topology = "sphere"

    def __post_init__(self):
        if min(self.a, self.b, self.c) <= 0:
            raise ValueError("ellipsoid semi-axes must be positive")

    def position(self, U, V):
        return _unit(U, V) * np.array([self.a, self.b, self.c])

    def exact_curvature(self, U, V):
        # level-set formulas for x^2/a^2 + y^2/b^2 + z^2/c^2 = 1
        a2, b2, c2 = self.a**2, self.b**2, self.c**2
        x, y, z = np.moveaxis(self.position(U, V), -1, 0)
        q = x**2 / a2**2 + y**2 / b2**2 + z**2 / c2**2
        K = 1.0 / (a2 * b2 * c2 * q**2)
        H = (x**2 + y**2 + z**2 - a2 - b2 - c2) / (a2 * b2 * c2 * q**1.5)
        return H, K


@dataclass(frozen=True)
class Torus:
    major: float = 2.0
    minor: float = 0.5
    topology = "torus"

    def __post_init__(self):
        if not (0 < self.minor < self.major):
            raise ValueError("torus needs 0 < minor < major")

    def position(self, U, V):
        a, b = self.major, self.minor
        ring = a + b * np.cos(V)
        return np.stack([ring * np.cos(U), ring * np.sin(U), b * np.sin(V)], axis=-1)

    def exact_curvature(self, U, V):
        a, b = self.major, self.minor
        ring = a + b * np.cos(V)
        K = np.cos(V) / (b * ring)
        H = -(a + 2 * b * np.cos(V)) / (b * ring)
        return H + 0 * U, K + 0 * U


@dataclass(frozen=True)
class GraphPatch:
    """Height field ``z = height(x, y)`` over the chart coordinates."""

    height: Callable = None
    name: str = "plane"
    topology = "patch"

    def position(self, U, V):
        Z = np.zeros_like(U) if self.height is None else np.asarray(self.height(U, V), float)
        return np.stack([U, V, Z + 0 * U], axis=-1)

    def exact_curvature(self, U, V):
        if self.height is not None:
            return None
        return np.zeros(U.shape), np.zeros(U.shape)


@dataclass(frozen=True)
class RadialGraph:
    """Star-shaped surface ``r(theta, phi) * unit(theta, phi)``.

    With no ``radius`` callable the radius is the zonal perturbation
    ``r0 * (1 + eps * P_degree(cos theta))``.
    """

    r0: float = 1.0
    eps: float = 0.0
    degree: int = 2
    radius: Optional[Callable] = None
    topology = "sphere"

    def __post_init__(self):
        if not self.r0 > 0:
            raise ValueError("radial graph needs r0 > 0")

    def radial(self, U, V):
        if self.radius is not None:
            return np.asarray(self.radius(U, V), float)
        coef = np.zeros(self.degree + 1)
        coef[-1] = 1.0
        r = self.r0 * (1 + self.eps * legendre.legval(np.cos(U), coef))
        if np.any(r <= 0):
            raise ValueError("radial graph radius must stay positive")
        return r

    def position(self, U, V):
        return self.radial(U, V)[..., None] * _unit(U, V)

    def exact_curvature(self, U, V):
        if self.eps == 0 and self.radius is None:
            return Sphere(self.r0).exact_curvature(U, V)
        return None


@dataclass(frozen=True)
class Cylinder:
    """Intrinsically flat strip ``(r cos(u/r), r sin(u/r), v)`` with arc-length ``u``.

    A chart periodic in ``u`` over ``[0, 2 pi r)`` gives a flat periodic patch
    (``K = 0``, Laplacian ``d_u^2 + d_v^2``), which a plane cannot provide.
    """

    radius: float = 1.0
    topology = "cylinder"

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("cylinder radius must be positive")

    def position(self, U, V):
        r = self.radius
        return np.stack([r * np.cos(U / r), r * np.sin(U / r), V + 0 * U], axis=-1)

    def exact_curvature(self, U, V):
        return np.full(U.shape, -1.0 / self.radius), np.zeros(U.shape)


SHAPES = {
    "sphere": Sphere,
    "cylinder": Cylinder,
    "ellipsoid": Ellipsoid,
    "torus": Torus,
    "radial": RadialGraph,
}


def graph_catalog(name, amplitude=0.1):
    """Named height fields usable from config files."""
    if name == "plane":
        return GraphPatch(None, "plane")
    if name == "wavy":
        return GraphPatch(lambda x, y: amplitude * np.sin(x) * np.sin(y), "wavy")
    raise UnknownShapeError(f"unknown graph patch {name!r}")


def make_shape(name, **params):
    if name in ("plane", "wavy"):
        return graph_catalog(name, **params)
    try:
        cls = SHAPES[name]
    except KeyError:
        raise UnknownShapeError(f"unknown shape {name!r}") from None
    return cls(**params)


def check_topology(chart: ChartGrid, shape):
    topo = getattr(shape, "topology", None)
    if topo is None:
        raise UnknownShapeError(f"{shape!r} is not a catalog shape")
    if topo == "sphere":
        if chart.kinds[1] != "periodic" or chart.kinds[0] == "periodic":
            raise TopologyError("sphere-like shapes need a lat-long chart")
        if chart.u[0] < -1e-12 or chart.u[-1] > np.pi + 1e-12:
            raise TopologyError("colatitude must lie in [0, pi]")
        if chart.kinds[0] == "bounded":
            at_pole = (np.isclose(chart.u, 0.0) | np.isclose(chart.u, np.pi))
            if np.any(chart.mask[at_pole]) and chart.mask[at_pole].all() is False:
                raise TopologyError("pole rows must be masked or fully present")
    elif topo == "torus":
        if chart.kinds != ("periodic", "periodic"):
            raise TopologyError("torus needs a chart periodic in both axes")
        for c in (chart.u, chart.v):
            if not np.isclose(c[-1] + (c[1] - c[0]) - c[0], 2 * np.pi):
                raise TopologyError("torus chart axes must span 2*pi")
    elif topo == "cylinder":
        if chart.kinds[0] != "periodic":
            raise TopologyError("cylinder needs a chart periodic in u")
        span = chart.u[-1] + (chart.u[1] - chart.u[0]) - chart.u[0]
        if not np.isclose(span, 2 * np.pi * shape.radius):
            raise TopologyError("cylinder chart must span the circumference in u")
    elif topo != "patch":
        raise UnknownShapeError(f"unknown topology {topo!r}")


def embed(chart: ChartGrid, shape):
    """Node positions ``R`` of ``shape`` sampled on ``chart``, shape ``(n_u, n_v, 3)``."""
    check_topology(chart, shape)
    U, V = chart.coords()
    R = np.asarray(shape.position(U, V), dtype=float)
    if R.shape != chart.shape + (3,):
        raise ChartError("shape returned positions of the wrong size")
    if not np.all(np.isfinite(R[chart.mask])):
        raise ChartError("non-finite positions at unmasked nodes")
    return R


def default_chart(shape, n, order=4, layout="reflect"):
    """A chart matching the shape's topology with ``n`` nodes per axis."""
    topo = shape.topology
    if topo == "sphere":
        return ChartGrid.latlong(n, n, layout=layout, order=order)
    if topo == "torus":
        return ChartGrid.torus(n, n, order=order)
    if topo == "cylinder":
        c = 2 * np.pi * shape.radius
        return ChartGrid.patch(n, n, (0.0, c), (0.0, c), periodic=(True, False), order=order)
    # graph coordinates are not periodic functions of the chart, so keep both axes bounded
    return ChartGrid.patch(n, n, (0.0, 2 * np.pi), (0.0, 2 * np.pi), periodic=(False, False), order=order)
