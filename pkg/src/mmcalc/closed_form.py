"""Analytic solutions of the compressible regime and their residual checks.

Space-time residuals work on samples over a regular grid with axes
``(t, x, y, z, component)``; derivatives use 4th-order centered stencils and
residuals are returned on the interior nodes where full stencils fit.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import QuadratureError, SingularityError, StencilError

D1 = ((-2, 1 / 12), (-1, -2 / 3), (1, 2 / 3), (2, -1 / 12))
D2 = ((-2, -1 / 12), (-1, 4 / 3), (0, -5 / 2), (1, 4 / 3), (2, -1 / 12))


# -- radial field -----------------------------------------------------------

def radial_velocity(k, points, r_min=1e-8):
    """Field ``k R / |R|^3`` and its analytic divergence at ``points``.

    The divergence ``k (3/r^3 - 3 R.R / r^5)`` is evaluated literally and is
    zero up to roundoff away from the origin.
    """
    if k == 0:
        raise ValueError("coupling constant k must be non-zero")
    P = np.asarray(points, dtype=float)
    r = np.linalg.norm(P, axis=-1)
    if np.any(r <= r_min):
        raise SingularityError(f"point within r_min={r_min:g} of the origin")
    V = k * P / r[..., None] ** 3
    div = k * (3.0 / r**3 - 3.0 * np.einsum("...a,...a->...", P, P) / r**5)
    return V, div


def numeric_divergence(fn, points, h=1e-3):
    """4th-order centered divergence of a vector field callable ``fn(points)``."""
    P = np.asarray(points, dtype=float)
    out = np.zeros(P.shape[:-1])
    for a in range(3):
        e = np.zeros(3)
        e[a] = h
        for off, w in D1:
            out = out + w * np.asarray(fn(P + off * e))[..., a]
    return out / h


# -- standing wave ----------------------------------------------------------

def _simpson(y, h):
    n = y.shape[-1] - 1
    w = np.ones(n + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return h / 3 * np.sum(w * y, axis=-1)


@dataclass(frozen=True, eq=False)
class StandingWave:
    """Fourier sine series of an initial profile with zero initial velocity.

    Each mode evolves as ``c_m sin(m pi xi / l) cos(v0 m pi t / l)``.
    """

    profile: Callable
    l: float = 1.0
    v0: float = 1.0
    m_max: int = 64
    coefficients: np.ndarray = field(default=None, repr=False)
    tail_bound: float = field(default=None)

    def __post_init__(self):
        if not self.l > 0 or not self.v0 > 0 or self.m_max < 1:
            raise ValueError("need l > 0, v0 > 0 and m_max >= 1")
        coarse = sine_coefficients(self.profile, self.l, self.m_max, 4 * self.m_max)
        fine = sine_coefficients(self.profile, self.l, 2 * self.m_max, 8 * self.m_max)
        xs = np.linspace(0.0, self.l, 8 * self.m_max + 1)
        scale = max(float(np.max(np.abs(self.profile(xs)))), np.finfo(float).tiny)
        if np.max(np.abs(coarse - fine[: self.m_max])) > 1e-6 * scale:
            raise QuadratureError("sine coefficients did not converge under panel doubling")
        object.__setattr__(self, "coefficients", coarse)
        object.__setattr__(self, "tail_bound", float(np.sum(np.abs(fine[self.m_max:]))))

    def _modes(self, xi, t):
        m = np.arange(1, self.m_max + 1)
        k = m * np.pi / self.l
        xi = np.asarray(xi, dtype=float)[..., None]
        t = np.asarray(t, dtype=float)[..., None]
        return k, np.sin(k * xi), k * self.v0 * t

    def __call__(self, xi, t=0.0):
        k, s, wt = self._modes(xi, t)
        return np.sum(self.coefficients * s * np.cos(wt), axis=-1)

    def time_derivative(self, xi, t=0.0):
        k, s, wt = self._modes(xi, t)
        return np.sum(-self.coefficients * s * k * self.v0 * np.sin(wt), axis=-1)


def sine_coefficients(profile, l, m_max, panels):
    """``(2/l) int_0^l psi(xi) sin(m pi xi / l) d xi`` by composite Simpson."""
    if panels % 2:
        panels += 1
    xi = np.linspace(0.0, l, panels + 1)
    y = np.asarray(profile(xi), dtype=float)
    m = np.arange(1, m_max + 1)[:, None]
    return 2.0 / l * _simpson(y * np.sin(m * np.pi * xi / l), l / panels)


def standing_wave(profile, l=1.0, v0=1.0, m_max=64):
    return StandingWave(profile, l, v0, m_max)


# -- fluctuating sphere -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class FluctuatingSphereParams:
    R0: np.ndarray
    omega: np.ndarray
    A: float = 1.0
    B: float = 0.0
    wave: Optional[StandingWave] = None
    S: Optional[np.ndarray] = None

    def __post_init__(self):
        R0 = np.asarray(self.R0, dtype=float)
        om = np.broadcast_to(np.asarray(self.omega, dtype=float), (3,)).copy()
        if not np.all(np.isfinite(om)):
            raise ValueError("frequencies must be finite")
        if self.S is None:
            r = np.linalg.norm(R0, axis=-1, keepdims=True)
            S = np.divide(R0, r, out=np.zeros_like(R0), where=r > 0)
        else:
            S = np.broadcast_to(np.asarray(self.S, dtype=float), R0.shape).copy()
        object.__setattr__(self, "R0", R0)
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "S", S)


def fluctuating_sphere(p, t):
    """Position and velocity of the superposed solution at time ``t``.

    ``R_a = A (R0_a + w_a R0_a S_a t) + B R0_a exp(w_a S_a t) + psi(R0_a, t) S_a``
    componentwise, with ``S`` frozen (by default the unit vector ``R0/|R0|``).
    """
    wS = p.omega * p.S
    expo = np.exp(wS * t)
    R = p.A * (p.R0 + wS * p.R0 * t) + p.B * p.R0 * expo
    dR = p.A * wS * p.R0 + p.B * p.R0 * wS * expo
    if p.wave is not None:
        R = R + p.wave(p.R0, t) * p.S
        dR = dR + p.wave.time_derivative(p.R0, t) * p.S
    return R, dR


def fluctuating_sphere_residual(p, t, h=1e-3):
    """Residual of ``d_t R = w_a S_a R_a`` on the superposition.

    ``d_t R`` comes from a 4th-order difference of :func:`fluctuating_sphere`
    positions; the right-hand side applies the rate law to each family:
    ``w S R0`` for the linear part, ``w S R`` for the exponential part, and
    ``d_t psi S`` for the wave part.
    """
    dR = sum(w * fluctuating_sphere(p, t + off * h)[0] for off, w in D1) / h
    wS = p.omega * p.S
    rhs = p.A * wS * p.R0 + wS * p.B * p.R0 * np.exp(wS * t)
    if p.wave is not None:
        rhs = rhs + p.wave.time_derivative(p.R0, t) * p.S
    return dR - rhs


def position_wave_field(wave, R0, S, points, t):
    """``R_a(x, t) = R0_a + psi(x_a, t) S_a`` for ambient points ``x``."""
    return np.asarray(R0, float) + wave(np.asarray(points, float), t) * np.asarray(S, float)


# -- space-time residuals --------------------------------------------------

def _check_samples(F, need_time=True):
    F = np.asarray(F, dtype=float)
    if F.ndim != 5:
        raise ValueError("samples must have axes (t, x, y, z, component)")
    axes = (0, 1, 2, 3) if need_time else (1, 2, 3)
    for a in axes:
        if F.shape[a] < 5:
            raise StencilError("need at least 5 samples along every differentiated axis")
    return F


def _interior(F, axis, stencil, h):
    n = F.shape[axis]
    out = 0.0
    for off, w in stencil:
        idx = [slice(2, -2)] * 4 + [slice(None)]
        idx[axis] = slice(2 + off, n - 2 + off)
        out = out + w * F[tuple(idx)]
    return out / h


def _curl(F, h):
    d = lambda comp, ax: _interior(F[..., comp:comp + 1], ax + 1, D1, h[ax])[..., 0]
    return np.stack([d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)], axis=-1)


def position_wave_residual(R, dt, h, v0):
    """``(1/v0^2) d_t^2 R - Laplacian R`` on the interior of a sampled field."""
    R = _check_samples(R)
    h = np.broadcast_to(np.asarray(h, float), (3,))
    res = _interior(R, 0, D2, dt**2) / v0**2
    for ax in range(3):
        res = res - _interior(R, ax + 1, D2, h[ax] ** 2)
    return res


def rotor_pair_residual(R, L, dt, h, v0):
    """``(d_t R + curl L, (1/v0^2) d_t L - curl R)`` on the interior."""
    R = _check_samples(R)
    L = _check_samples(L)
    if R.shape != L.shape:
        raise ValueError("R and L must be sampled on the same grid")
    h = np.broadcast_to(np.asarray(h, float), (3,))
    res1 = _interior(R, 0, D1, dt) + _curl(L, h)
    res2 = _interior(L, 0, D1, dt) / v0**2 - _curl(R, h)
    return res1, res2


def sample_spacetime(fn, centre, t0, h, dt, n=5, nt=5):
    """Sample ``fn(points, t)`` on a small grid around ``centre`` and ``t0``.

    Returns an array with axes ``(t, x, y, z, component)``.
    """
    h = np.broadcast_to(np.asarray(h, float), (3,))
    offs = np.arange(n) - n // 2
    X, Y, Z = np.meshgrid(*(centre[a] + offs * h[a] for a in range(3)), indexing="ij")
    pts = np.stack([X, Y, Z], axis=-1)
    times = t0 + (np.arange(nt) - nt // 2) * dt
    return np.stack([np.asarray(fn(pts, s), float) for s in times], axis=0)


def plane_wave_pair(v0=1.0):
    """The rotor pair ``R = (0, 0, sin(x - v0 t))``, ``L = (0, v0 sin(x - v0 t), 0)``."""
    def R(P, t):
        s = np.sin(P[..., 0] - v0 * t)
        return np.stack([0 * s, 0 * s, s], axis=-1)

    def L(P, t):
        s = np.sin(P[..., 0] - v0 * t)
        return np.stack([0 * s, v0 * s, 0 * s], axis=-1)

    return R, L
