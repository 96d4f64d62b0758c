"""Structured two-parameter chart grids.

A chart carries the surface coordinates ``(u, v)`` of every node, the layout
of each axis, a per-node validity mask, and the stencil order used for all
chart derivatives. Axis layouts:

``periodic``
    wrap-around, nodes at ``u0 + j*L/n``.
``bounded``
    open ends, nodes at ``u0 + j*L/(n-1)``; stencils go one-sided at the ends
    and next to masked nodes.
``polar``
    colatitude of a lat-long chart on cell centres ``(j + 1/2) pi / n``.
    Ghost rows beyond each pole are filled by the reflection
    ``(theta, phi) -> (-theta, phi + pi)``, so interior stencils are used
    everywhere. Chart-tensor components pick up a factor ``-1`` per
    colatitude index under the reflection.
"""

from dataclasses import dataclass, field

import numpy as np

from . import fd
from .errors import ChartError

KINDS = ("periodic", "bounded", "polar")


@dataclass(frozen=True, eq=False)
class ChartGrid:
    u: np.ndarray
    v: np.ndarray
    kinds: tuple = ("periodic", "periodic")
    mask: np.ndarray = None
    order: int = 4
    _weights: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        if u.ndim != 1 or v.ndim != 1 or u.size < 8 or v.size < 8:
            raise ChartError("chart needs at least 8 nodes per axis")
        for k in self.kinds:
            if k not in KINDS:
                raise ChartError(f"unknown axis kind {k!r}")
        if self.kinds[1] == "polar":
            raise ChartError("only the first axis may be polar")
        if self.kinds[0] == "polar" and (self.kinds[1] != "periodic" or v.size % 2):
            raise ChartError("polar axis needs a periodic second axis with an even node count")
        if not (np.all(np.diff(u) > 0) and np.all(np.diff(v) > 0)):
            raise ChartError("chart coordinates must be strictly increasing")
        if not (np.allclose(np.diff(u), u[1] - u[0]) and np.allclose(np.diff(v), v[1] - v[0])):
            raise ChartError("chart spacing must be uniform")
        if fd.SUPPORTED_ORDERS.count(self.order) == 0:
            raise ChartError(f"stencil order must be one of {fd.SUPPORTED_ORDERS}")
        mask = np.ones((u.size, v.size), dtype=bool) if self.mask is None else np.asarray(self.mask, bool)
        if mask.shape != (u.size, v.size):
            raise ChartError("mask shape does not match the grid")
        object.__setattr__(self, "mask", mask)

    # -- constructors -----------------------------------------------------

    @classmethod
    def latlong(cls, n_theta, n_phi=None, layout="reflect", order=4):
        """Colatitude/longitude chart for sphere-like shapes.

        ``layout="reflect"`` places colatitudes on cell centres and closes the
        poles by reflection. ``layout="masked"`` includes the pole rows and
        masks two rows at each pole; stencils turn one-sided next to the mask
        and integrals cover only the unmasked band.
        """
        n_phi = n_theta if n_phi is None else n_phi
        phi = 2 * np.pi * np.arange(n_phi) / n_phi
        if layout == "reflect":
            theta = (np.arange(n_theta) + 0.5) * np.pi / n_theta
            return cls(theta, phi, ("polar", "periodic"), None, order)
        if layout == "masked":
            theta = np.linspace(0.0, np.pi, n_theta)
            mask = np.ones((n_theta, n_phi), dtype=bool)
            mask[:2] = False
            mask[-2:] = False
            return cls(theta, phi, ("bounded", "periodic"), mask, order)
        raise ChartError(f"unknown lat-long layout {layout!r}")

    @classmethod
    def torus(cls, n_u, n_v=None, order=4):
        n_v = n_u if n_v is None else n_v
        u = 2 * np.pi * np.arange(n_u) / n_u
        v = 2 * np.pi * np.arange(n_v) / n_v
        return cls(u, v, ("periodic", "periodic"), None, order)

    @classmethod
    def patch(cls, n_u, n_v=None, u_range=(0.0, 1.0), v_range=(0.0, 1.0),
              periodic=(False, False), order=4):
        n_v = n_u if n_v is None else n_v

        def axis(n, lo_hi, per):
            lo, hi = lo_hi
            if hi <= lo:
                raise ChartError("empty coordinate range")
            if per:
                return lo + (hi - lo) * np.arange(n) / n
            return np.linspace(lo, hi, n)

        kinds = tuple("periodic" if p else "bounded" for p in periodic)
        return cls(axis(n_u, u_range, periodic[0]), axis(n_v, v_range, periodic[1]), kinds, None, order)

    # -- basic properties -------------------------------------------------

    @property
    def n_u(self):
        return self.u.size

    @property
    def n_v(self):
        return self.v.size

    @property
    def shape(self):
        return (self.n_u, self.n_v)

    @property
    def h_u(self):
        return float(self.u[1] - self.u[0])

    @property
    def h_v(self):
        return float(self.v[1] - self.v[0])

    @property
    def spacing(self):
        return (self.h_u, self.h_v)

    @property
    def periodicity(self):
        return tuple(k != "bounded" for k in self.kinds)

    @property
    def pole_mask(self):
        """Alias of :attr:`mask`: True where the node is valid."""
        return self.mask

    @property
    def is_closed(self):
        return "bounded" not in self.kinds

    @property
    def all_valid(self):
        return bool(self.mask.all())

    def coords(self):
        return np.meshgrid(self.u, self.v, indexing="ij")

    def with_order(self, order):
        return ChartGrid(self.u, self.v, self.kinds, self.mask, order)

    # -- differentiation --------------------------------------------------

    def parity(self, n_chart_indices=0, n_ambient=0):
        """Reflection factor for a field with the given trailing index layout.

        Returns an array broadcastable against ``field[i, j, ...]`` whose
        entries are ``(-1)**(number of colatitude indices)``. Ambient indices
        come after the chart indices and are reflection-invariant.
        """
        if n_chart_indices == 0:
            return np.ones((1,) * n_ambient)
        grids = np.meshgrid(*([np.arange(2)] * n_chart_indices), indexing="ij")
        count = sum((g == 0).astype(int) for g in grids)
        p = (-1.0) ** count
        return p.reshape(p.shape + (1,) * n_ambient)

    def diff(self, f, axis, deriv=1, parity=1.0):
        """Partial derivative of a nodal field along chart axis ``axis``.

        ``f`` has shape ``(n_u, n_v, ...)``; ``parity`` is only consulted on a
        polar axis and must broadcast against ``f.shape[2:]``.
        """
        f = np.asarray(f, dtype=float)
        if f.shape[:2] != self.shape:
            raise ChartError(f"field shape {f.shape[:2]} does not match chart {self.shape}")
        kind = self.kinds[axis]
        h = self.spacing[axis]
        valid = None if self.all_valid else self.mask
        if kind == "polar":
            g = max(self.order // 2, 3)
            half = self.n_v // 2
            rolled = np.roll(f, -half, axis=1) * parity
            vlo = vhi = None
            if valid is not None:
                vrolled = np.roll(valid, -half, axis=1)
                vlo, vhi = vrolled[:g][::-1], vrolled[-g:][::-1]
            return fd.derivative(
                f, 0, h, deriv=deriv, order=self.order, kind="ghost", valid=valid,
                ghost_lo=rolled[:g][::-1], ghost_hi=rolled[-g:][::-1],
                valid_lo=vlo, valid_hi=vhi)
        return fd.derivative(f, axis, h, deriv=deriv, order=self.order, kind=kind, valid=valid)

    def gradient(self, f, parity=1.0):
        """Stack of both chart partials: shape ``(n_u, n_v, 2, ...)``."""
        return np.stack([self.diff(f, 0, parity=parity), self.diff(f, 1, parity=parity)], axis=2)

    # -- quadrature -------------------------------------------------------

    def _axis_weights(self, axis):
        kind = self.kinds[axis]
        coords = self.u if axis == 0 else self.v
        n = coords.size
        h = self.spacing[axis]
        mask = self.mask if axis == 0 else self.mask.T
        if kind == "periodic":
            w = np.full(mask.shape, h)
        elif kind == "bounded":
            # trapezoid restarted on every run of valid nodes
            before = np.vstack([np.zeros((1, mask.shape[1]), bool), mask[:-1]])
            after = np.vstack([mask[1:], np.zeros((1, mask.shape[1]), bool)])
            w = np.where(before & after, h, h / 2)
        else:
            # Fejer's first rule integrates g(theta) sin(theta); the integrand
            # we receive already carries sin(theta) through the area element.
            k = np.arange(1, n // 2 + 1)
            fejer = (2.0 / n) * (1 - 2 * np.sum(
                np.cos(2 * np.outer(coords, k)) / (4 * k**2 - 1), axis=1))
            w = np.repeat((fejer / np.sin(coords))[:, None], mask.shape[1], axis=1)
        w = np.where(mask, w, 0.0)
        return w if axis == 0 else w.T

    @property
    def weights(self):
        """Quadrature weights over the chart (zero on masked nodes).

        A masked lat-long chart integrates over the band between the masks.
        """
        if "w" not in self._weights:
            self._weights["w"] = self._axis_weights(0) * self._axis_weights(1)
        return self._weights["w"]
