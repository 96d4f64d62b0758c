"""Navier-Stokes residuals, viscous stress and momentum flux on a 3-D box grid.

Fields live on a regular ``(nx, ny, nz)`` grid with a trailing component axis
for vectors and two trailing axes for tensors. Each axis is either periodic
(spacing ``L/n``, the end point excluded) or bounded (spacing ``L/(n-1)``,
second-order one-sided stencils at the ends). Only residual evaluation is
provided; nothing here integrates the flow in time.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import fd
from .errors import MissingSamplesError
from .rng import XorShift64Star
from .transport import time_derivative


@dataclass(frozen=True)
class BoxGrid:
    n: tuple
    lo: tuple = (0.0, 0.0, 0.0)
    hi: tuple = (2 * np.pi, 2 * np.pi, 2 * np.pi)
    periodic: tuple = (True, True, True)
    order: int = 4

    def __post_init__(self):
        n = tuple(int(k) for k in np.broadcast_to(self.n, (3,)))
        lo = tuple(float(x) for x in np.broadcast_to(self.lo, (3,)))
        hi = tuple(float(x) for x in np.broadcast_to(self.hi, (3,)))
        per = tuple(bool(p) for p in np.broadcast_to(self.periodic, (3,)))
        if any(k < 5 for k in n):
            raise ValueError("need at least 5 nodes per axis")
        if any(b <= a for a, b in zip(lo, hi)):
            raise ValueError("box must have positive extent")
        if self.order not in fd.SUPPORTED_ORDERS:
            raise ValueError(f"unsupported stencil order {self.order}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "periodic", per)

    @property
    def shape(self):
        return self.n

    @property
    def spacing(self):
        return tuple((b - a) / (k if p else k - 1)
                     for a, b, k, p in zip(self.lo, self.hi, self.n, self.periodic))

    def axis(self, a):
        return self.lo[a] + self.spacing[a] * np.arange(self.n[a])

    def points(self):
        """Node coordinates, shape ``(nx, ny, nz, 3)``."""
        return np.stack(np.meshgrid(*(self.axis(a) for a in range(3)), indexing="ij"), axis=-1)

    def diff(self, f, a, deriv=1):
        kind = "periodic" if self.periodic[a] else "bounded"
        return fd.derivative(f, a, self.spacing[a], deriv=deriv, order=self.order, kind=kind)

    def gradient(self, f):
        """``out[..., a] = d_a f`` with the derivative index appended last."""
        return np.stack([self.diff(f, a) for a in range(3)], axis=-1)


@dataclass(frozen=True, eq=False)
class AmbientFlow:
    grid: BoxGrid
    V: np.ndarray                 # (nx, ny, nz, 3)
    p: np.ndarray                 # (nx, ny, nz)
    rho: np.ndarray = 1.0
    mu: float = 0.0
    xi: float = 0.0
    E: Optional[np.ndarray] = None

    def __post_init__(self):
        V = np.asarray(self.V, dtype=float)
        if V.shape != self.grid.shape + (3,):
            raise ValueError(f"velocity must have shape {self.grid.shape + (3,)}")
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "p", np.broadcast_to(np.asarray(self.p, float), self.grid.shape))
        rho = np.broadcast_to(np.asarray(self.rho, float), self.grid.shape)
        if np.any(rho <= 0):
            raise ValueError("density must be positive")
        if self.mu < 0 or self.xi < 0:
            raise ValueError("viscosities must be non-negative")
        object.__setattr__(self, "rho", rho)


def velocity_gradient(flow):
    """``G[..., a, b] = d_a V_b``."""
    g = flow.grid
    return np.stack([g.diff(flow.V, a) for a in range(3)], axis=-2)


def viscous_stress(flow, G=None):
    """``mu (d_a V_b + d_b V_a - 2/3 delta div V) + xi delta div V``."""
    G = velocity_gradient(flow) if G is None else G
    div = np.trace(G, axis1=-2, axis2=-1)
    eye = np.eye(3)
    return (flow.mu * (G + np.swapaxes(G, -1, -2) - (2.0 / 3.0) * div[..., None, None] * eye)
            + flow.xi * div[..., None, None] * eye)


def momentum_flux(flow, sigma=None):
    """``M[..., a, b] = p delta_ab + rho V_a V_b - sigma'_ab``."""
    sigma = viscous_stress(flow) if sigma is None else sigma
    V = flow.V
    return (flow.p[..., None, None] * np.eye(3)
            + flow.rho[..., None, None] * V[..., :, None] * V[..., None, :] - sigma)


def tensor_divergence(T, grid):
    """``out[..., a] = d_b T[..., a, b]``."""
    return sum(grid.diff(T[..., b], b) for b in range(3))


def vector_divergence(F, grid):
    return sum(grid.diff(F[..., a], a) for a in range(3))


def vector_laplacian(F, grid):
    return sum(grid.diff(F, a, deriv=2) for a in range(3))


def _rate(samples, dt, dVdt, steady, shape):
    if steady:
        return np.zeros(shape)
    if dVdt is not None:
        return np.asarray(dVdt, dtype=float)
    if samples is None or dt is None:
        raise MissingSamplesError("need time samples with dt, an explicit rate, or steady=True")
    return time_derivative(samples, dt)


def ns_residual(flow, samples=None, dt=None, *, dVdt=None, steady=False):
    """``rho (d_t V + (V.grad) V) + grad p - mu Lap V - (xi + mu/3) grad div V``.

    ``d_t V`` comes from ``samples`` (3 or 5 velocity fields centred on the
    current time, spacing ``dt``), from an explicit ``dVdt``, or is zero when
    ``steady`` is set.
    """
    g = flow.grid
    V = flow.V
    rate = _rate(samples, dt, dVdt, steady, V.shape)
    G = velocity_gradient(flow)
    adv = np.einsum("...a,...ab->...b", V, G)
    div = np.trace(G, axis1=-2, axis2=-1)
    res = flow.rho[..., None] * (rate + adv) + g.gradient(flow.p)
    if flow.mu or flow.xi:
        res = res - flow.mu * vector_laplacian(V, g) - (flow.xi + flow.mu / 3) * g.gradient(div)
    return res


def energy_flux_divergence(E, flow):
    """``d_a (E V^a)``."""
    E = np.broadcast_to(np.asarray(E, float), flow.grid.shape)
    return vector_divergence(E[..., None] * flow.V, flow.grid)


def continuity_residual(flow, samples=None, dt=None, *, drho_dt=None, steady=False):
    """``d_t rho + d_a (rho V^a)``."""
    rate = _rate(samples, dt, drho_dt, steady, flow.grid.shape)
    return rate + vector_divergence(flow.rho[..., None] * flow.V, flow.grid)


# -- analytic flow catalog -------------------------------------------------

@dataclass(frozen=True, eq=False)
class FlowCase:
    """A named flow with its exact residual.

    ``state(t)`` returns the :class:`AmbientFlow` at time ``t``; ``expected``
    is the exact value of :func:`ns_residual` (zero for exact solutions).
    """

    name: str
    grid: BoxGrid
    state: Callable
    steady: bool
    expected: np.ndarray = field(repr=False, default=None)

    def residual(self, t=0.0, dt=1e-3):
        flow = self.state(t)
        if self.steady:
            return ns_residual(flow, steady=True)
        samples = [self.state(t + k * dt).V for k in (-2, -1, 0, 1, 2)]
        return ns_residual(flow, samples, dt)

    def error(self, t=0.0, dt=1e-3):
        return float(np.max(np.abs(self.residual(t, dt) - self.expected)))


def _bounded_box(n, half, order):
    return BoxGrid(n, (-half,) * 3, (half,) * 3, (False, False, True), order)


def rest_flow(n=16, p0=1.0, rho=1.0, mu=0.1, xi=0.05, order=4):
    grid = BoxGrid(n, order=order)
    flow = AmbientFlow(grid, np.zeros(grid.shape + (3,)), np.full(grid.shape, p0), rho, mu, xi)
    return FlowCase("rest", grid, lambda t: flow, True, np.zeros(grid.shape + (3,)))


def rigid_rotation_flow(n=(16, 16, 8), omega=1.0, rho=1.0, mu=0.1, xi=0.05, half=1.0, order=4):
    """``V = omega e_z x r`` with the balancing pressure ``rho omega^2 r^2 / 2``."""
    grid = _bounded_box(n, half, order)
    X = grid.points()
    x, y = X[..., 0], X[..., 1]
    V = np.stack([-omega * y, omega * x, 0 * x], axis=-1)
    p = 0.5 * rho * omega**2 * (x**2 + y**2)
    flow = AmbientFlow(grid, V, p, rho, mu, xi)
    return FlowCase("rigid_rotation", grid, lambda t: flow, True, np.zeros(grid.shape + (3,)))


def swirl_flow(n=(32, 32, 8), omega=1.0, a=0.5, rho=1.0, mu=0.1, xi=0.05, half=4.0, order=4):
    """Rigid rotation plus a Gaussian swirl ``V_theta = omega r + a r exp(-r^2)``.

    The pressure ``rho (omega^2 r^2/2 - omega a e^{-r^2} - a^2 e^{-2 r^2}/4)``
    balances the centripetal term exactly, so the residual is the viscous part
    ``-mu a e^{-r^2} (4 r^2 - 8) (-y, x, 0)``.
    """
    grid = _bounded_box(n, half, order)
    X = grid.points()
    x, y = X[..., 0], X[..., 1]
    r2 = x**2 + y**2
    g = np.exp(-r2)
    f = omega + a * g
    V = np.stack([-f * y, f * x, 0 * x], axis=-1)
    p = rho * (0.5 * omega**2 * r2 - omega * a * g - 0.25 * a**2 * g**2)
    flow = AmbientFlow(grid, V, p, rho, mu, xi)
    lap = a * g * (4 * r2 - 8)
    expected = -mu * np.stack([-lap * y, lap * x, 0 * x], axis=-1)
    return FlowCase("swirl", grid, lambda t: flow, True, expected)


def shear_flow(n=(8, 512, 8), rho=1.0, mu=0.1, xi=0.05, p0=1.0, order=4):
    """``V = (sin y, 0, 0)``, steady; residual is ``(mu sin y, 0, 0)``."""
    grid = BoxGrid(n, order=order)
    X = grid.points()
    s = np.sin(X[..., 1])
    V = np.stack([s, 0 * s, 0 * s], axis=-1)
    flow = AmbientFlow(grid, V, np.full(grid.shape, p0), rho, mu, xi)
    expected = np.stack([mu * s, 0 * s, 0 * s], axis=-1)
    return FlowCase("shear", grid, lambda t: flow, True, expected)


def taylor_green_flow(n=(32, 32, 8), rho=1.0, mu=0.1, xi=0.05, order=4):
    """Decaying Taylor-Green vortex, an exact unsteady solution (residual 0)."""
    grid = BoxGrid(n, order=order)
    X = grid.points()
    x, y = X[..., 0], X[..., 1]
    nu = mu / rho

    def state(t):
        F = np.exp(-2 * nu * t)
        V = F * np.stack([np.sin(x) * np.cos(y), -np.cos(x) * np.sin(y), 0 * x], axis=-1)
        p = 0.25 * rho * (np.cos(2 * x) + np.cos(2 * y)) * F**2
        return AmbientFlow(grid, V, p, rho, mu, xi)

    return FlowCase("taylor_green", grid, state, False, np.zeros(grid.shape + (3,)))


FLOWS = {
    "rest": rest_flow,
    "rigid_rotation": rigid_rotation_flow,
    "swirl": swirl_flow,
    "shear": shear_flow,
    "taylor_green": taylor_green_flow,
}


def make_flow(name, **kw):
    try:
        return FLOWS[name](**kw)
    except KeyError:
        raise ValueError(f"unknown flow {name!r}; choose from {sorted(FLOWS)}") from None


def rigid_motion(grid, a, omega, centre=(0.0, 0.0, 0.0)):
    """Velocity ``a + omega x (r - centre)`` on ``grid``."""
    r = grid.points() - np.asarray(centre, float)
    return np.asarray(a, float) + np.cross(np.asarray(omega, float), r)


def random_rigid_motions(grid, count, seed, speed=1.0):
    """``count`` rigid velocity fields with components of ``a`` and ``omega`` in ``[-speed, speed]``."""
    rng = XorShift64Star(seed)
    out = []
    for _ in range(count):
        a = rng.uniforms(3, -speed, speed)
        om = rng.uniforms(3, -speed, speed)
        out.append((np.array(a), np.array(om), rigid_motion(grid, a, om)))
    return out
