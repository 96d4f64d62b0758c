"""Time-dependent surface operators and transport-theorem checks.

A :class:`MovingSurface` samples a prescribed motion on a fixed chart. The
velocity of a chart point, ``d R / dt`` at fixed ``(u, v)``, is the ambient
velocity ``V``; it splits into the normal speed ``C = N . V`` and tangent
components ``V^i``. Temporal derivatives at fixed chart coordinates use the
4-point central difference with step ``dt_probe``.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import geometry as geo
from .errors import ChartError, MissingSamplesError

# 4-point central difference for d/dt: offsets -2..2 (the centre is unused)
CENTRAL4 = ((-2, 1 / 12), (-1, -2 / 3), (1, 2 / 3), (2, -1 / 12))
CENTRAL2 = ((-1, -0.5), (1, 0.5))


def time_derivative(samples, dt):
    """Central difference of equally spaced samples centred on the middle one.

    Accepts 3 samples (second order) or 5 samples (fourth order).
    """
    if samples is None:
        raise MissingSamplesError("temporal samples are required for d/dt")
    samples = list(samples)
    if len(samples) == 5:
        stencil, mid = CENTRAL4, 2
    elif len(samples) == 3:
        stencil, mid = CENTRAL2, 1
    else:
        raise MissingSamplesError("need 3 or 5 temporal samples centred on t")
    out = 0.0
    for off, w in stencil:
        out = out + w * np.asarray(samples[mid + off], dtype=float)
    return out / dt


@dataclass(frozen=True, eq=False)
class SurfaceVelocity:
    V_amb: np.ndarray
    C: np.ndarray
    V_tan: np.ndarray      # contravariant V^i
    V_low: np.ndarray      # covariant V_i

    def reconstruct(self, geom):
        return self.C[..., None] * geom.N + np.einsum("...i,...ia->...a", self.V_tan, geom.S)


def decompose_velocity(V_amb, geom):
    V_amb = np.asarray(V_amb, dtype=float)
    C = np.einsum("...a,...a->...", geom.N, V_amb)
    V_low = np.einsum("...ia,...a->...i", geom.S, V_amb)
    V_tan = geo.raise_index(V_low, geom)
    return SurfaceVelocity(V_amb, C, V_tan, V_low)


def reconstruction_error(vel, geom):
    """Max relative mismatch between ``V`` and ``C N + V^i S_i`` on valid nodes."""
    diff = np.linalg.norm(vel.reconstruct(geom) - vel.V_amb, axis=-1)[geom.mask]
    scale = max(np.max(np.linalg.norm(vel.V_amb, axis=-1)[geom.mask]), np.finfo(float).tiny)
    return float(np.max(diff) / scale)


def time_christoffel(vel, geom):
    """``Gammadot[..., a, b] = nabla_a V^b - C B^b_a``."""
    dV = geo.covariant_derivative(vel.V_tan, geom, "u")
    return dV - vel.C[..., None, None] * np.swapaxes(geom.Bmix, -1, -2)


def covariant_time_derivative(samples, dt, vel, gdot, geom, signature=""):
    """``nabla-dot`` of a chart tensor given temporal samples at fixed chart points.

    ``samples`` holds the field at ``t - 2dt .. t + 2dt`` (5 samples) or
    ``t - dt, t, t + dt`` (3 samples); ``geom``/``vel``/``gdot`` describe the
    surface at ``t``.
    """
    dTdt = time_derivative(samples, dt)
    T = np.asarray(list(samples)[len(samples) // 2], dtype=float)
    rank = len(signature)
    out = dTdt
    if rank == 0:
        grad = geom.chart.gradient(T)
        return out - np.einsum("...k,...k->...", vel.V_tan, grad)
    dT = geo.covariant_derivative(T, geom, signature)
    letters = "ab"[:rank]
    out = out - np.einsum(f"...k,...k{letters}->...{letters}", vel.V_tan, dT)
    for p, kind in enumerate(signature):
        src = list(letters)
        src[p] = "z"
        src = "".join(src)
        if kind == "u":
            # + Gammadot^b_k T^{..k..}
            out = out + np.einsum(f"...z{letters[p]},...{src}->...{letters}", gdot, T)
        else:
            # - Gammadot^k_a T_{..k..}
            out = out - np.einsum(f"...{letters[p]}z,...{src}->...{letters}", gdot, T)
    return out


def metric_rate(vel, geom):
    """``nabla_i V_j + nabla_j V_i - 2 C B_ij``."""
    dV = geo.covariant_derivative(vel.V_low, geom, "d")
    return dV + np.swapaxes(dV, -1, -2) - 2 * vel.C[..., None, None] * geom.B


def area_element_rate(vel, geom):
    """``d sqrt(S)/dt = sqrt(S) (nabla_i V^i - C B^i_i)``."""
    return geom.sqrtS * (geo.divergence(vel.V_tan, geom) - vel.C * geom.H)


def mean_curvature_rate(vel, geom, form="expanded"):
    """``nabla_i nabla^i C + C B_ij B^ij``."""
    return geo.laplace_beltrami(vel.C, geom, form=form) + vel.C * geom.B_sq


def incompressibility_residual(vel, geom):
    """``oint C dS``; zero for volume-preserving motions."""
    if not geom.closed:
        raise ChartError("incompressibility needs a closed surface")
    return float(geo.integrate_surface(vel.C, geom))


# -- moving surfaces --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Motion:
    """Analytic surface motion ``position(U, V, t)`` on a chart of given topology."""

    name: str
    topology: str
    position: Callable
    time_scale: float = 1.0
    closed: bool = True


@dataclass(eq=False)
class MovingSurface:
    motion: Motion
    chart: object
    dt_probe: float = None
    curvature_sign: int = 1
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.dt_probe is None:
            self.dt_probe = 1e-4 * self.motion.time_scale
        if not self.dt_probe > 0:
            raise ValueError("dt_probe must be positive")
        from .shapes import check_topology

        check_topology(self.chart, self.motion)

    def position(self, t):
        U, V = self.chart.coords()
        R = np.asarray(self.motion.position(U, V, t), dtype=float)
        if not np.all(np.isfinite(R[self.chart.mask])):
            raise ChartError(f"motion {self.motion.name!r} is not finite at t={t}")
        return R

    def geometry(self, t):
        key = float(t)
        if key not in self._cache:
            if len(self._cache) > 16:
                self._cache.clear()
            self._cache[key] = geo.build_geometry(
                self.chart, self.position(t), closed=self.motion.closed,
                curvature_sign=self.curvature_sign)
        return self._cache[key]

    def probe_times(self, t):
        h = self.dt_probe
        return [t + k * h for k in (-2, -1, 0, 1, 2)]

    def samples(self, fn, t):
        """``fn(geometry, time)`` evaluated at the five probe times around ``t``."""
        return [fn(self.geometry(s), s) for s in self.probe_times(t)]

    def velocity(self, t):
        R = [self.position(s) for s in self.probe_times(t)]
        return decompose_velocity(time_derivative(R, self.dt_probe), self.geometry(t))

    def time_christoffel(self, t):
        return time_christoffel(self.velocity(t), self.geometry(t))

    def covariant_time_derivative(self, fn, t, signature=""):
        geom = self.geometry(t)
        vel = self.velocity(t)
        return covariant_time_derivative(self.samples(fn, t), self.dt_probe, vel,
                                         time_christoffel(vel, geom), geom, signature)


@dataclass(frozen=True)
class TransportCheck:
    lhs: float
    rhs: float
    contour: float
    residual: float

    @property
    def relative(self):
        scale = max(abs(self.lhs), abs(self.rhs))
        return abs(self.residual) / scale if scale > 0 else abs(self.residual)


def _edge_contour(geom, vel, f):
    """``oint n_i V^i f d gamma`` over the edges of bounded chart axes."""
    chart = geom.chart
    if not chart.all_valid:
        raise ChartError("contour terms need an unmasked patch")
    total = 0.0
    for axis in (0, 1):
        if chart.kinds[axis] != "bounded":
            continue
        other = 1 - axis
        h = chart.spacing[other]
        n = chart.shape[other]
        w = np.full(n, h)
        if chart.kinds[other] == "bounded":
            w[0] = w[-1] = h / 2
        for end, sign in ((0, -1.0), (-1, 1.0)):
            sl = (end, slice(None)) if axis == 0 else (slice(None), end)
            speed = sign * vel.V_tan[sl][:, axis] / np.sqrt(geom.inv_metric[sl][:, axis, axis])
            dgamma = np.linalg.norm(geom.S[sl][:, other, :], axis=-1)
            total += float(np.sum(w * speed * f[sl] * dgamma))
    return total


def check_surface_transport(fn, moving, t=0.0, contour=None):
    """Surface transport theorem for ``f = fn(geometry, time)``.

    residual = d/dt int f dS - int (nabla-dot f - f C B^i_i) dS - oint v f d gamma

    ``contour`` defaults to True on open patches and False on closed surfaces.
    """
    geom = moving.geometry(t)
    if contour is None:
        contour = not geom.closed
    if contour and geom.closed:
        raise ChartError("contour term requested on a closed surface")
    integrals = [geo.integrate_surface(fn(moving.geometry(s), s), moving.geometry(s))
                 for s in moving.probe_times(t)]
    lhs = float(time_derivative(integrals, moving.dt_probe))
    vel = moving.velocity(t)
    f = np.asarray(fn(geom, t), dtype=float)
    fdot = moving.covariant_time_derivative(fn, t)
    rhs = float(geo.integrate_surface(fdot - f * vel.C * geom.H, geom))
    edge = _edge_contour(geom, vel, f) if contour else 0.0
    return TransportCheck(lhs, rhs + edge, edge, lhs - rhs - edge)


def check_space_transport(F, moving, t=0.0, n_radial=24):
    """Volume transport theorem for a field ``F(points, time)`` on the enclosed region.

    residual = d/dt int F dOmega - int dF/dt dOmega - oint F C dS
    """
    geom = moving.geometry(t)
    if not geom.closed:
        raise ChartError("space transport needs a closed surface")
    times = moving.probe_times(t)
    vols = [geo.integrate_volume(lambda x, s=s: F(x, s), moving.geometry(s), n_radial) for s in times]
    lhs = float(time_derivative(vols, moving.dt_probe))
    dF = lambda x: time_derivative([F(x, s) for s in times], moving.dt_probe)
    interior = float(geo.integrate_volume(dF, geom, n_radial))
    vel = moving.velocity(t)
    flux = float(geo.integrate_surface(F(geom.R, t) * vel.C, geom))
    return TransportCheck(lhs, interior + flux, 0.0, lhs - interior - flux)
