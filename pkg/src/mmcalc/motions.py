"""Catalog of analytic surface motions for transport checks."""

import numpy as np

from .shapes import _unit
from .transport import Motion


def expanding_sphere(r0=1.0, rate=0.1):
    """Sphere of radius ``r0 + rate*t``; purely normal motion.

    The time scale is ``r0 / |rate|`` (the e-folding time of the radius).
    """
    scale = r0 / abs(rate) if rate else 1.0
    return Motion("expanding_sphere", "sphere",
                  lambda U, V, t: (r0 + rate * t) * _unit(U, V), time_scale=scale)


def translating_sphere(radius=1.0, velocity=(0.0, 0.0, 1.0)):
    vel = np.asarray(velocity, dtype=float)
    return Motion("translating_sphere", "sphere",
                  lambda U, V, t: radius * _unit(U, V) + t * vel, time_scale=radius)


def rotating_sphere(radius=1.0, omega=1.0):
    """Rigid rotation about z: chart points slide tangentially."""
    return Motion("rotating_sphere", "sphere",
                  lambda U, V, t: radius * _unit(U, V + omega * t), time_scale=1.0)


def oscillating_ellipsoid(amp=0.1, omega=1.0):
    """Semi-axes ``1 + amp sin(wt)``, ``1 - amp sin(wt)/2``, ``1 + amp sin(2wt)/3``."""
    def pos(U, V, t):
        s = np.sin(omega * t)
        axes = np.array([1 + amp * s, 1 - 0.5 * amp * s, 1 + amp * np.sin(2 * omega * t) / 3])
        return _unit(U, V) * axes
    return Motion("oscillating_ellipsoid", "sphere", pos, time_scale=1.0 / omega)


def isochoric_ellipsoid(eps=0.2, omega=1.0):
    """Ellipsoid with ``a*b*c = 1`` at all times (volume preserving)."""
    def pos(U, V, t):
        a = 1 + eps * np.sin(omega * t)
        b = 1 + 0.5 * eps * np.cos(omega * t)
        return _unit(U, V) * np.array([a, b, 1.0 / (a * b)])
    return Motion("isochoric_ellipsoid", "sphere", pos, time_scale=1.0 / omega)


def rotating_torus(major=2.0, minor=0.5, omega=1.0):
    """Torus rotated rigidly about the x axis."""
    def pos(U, V, t):
        ring = major + minor * np.cos(V)
        x, y, z = ring * np.cos(U), ring * np.sin(U), minor * np.sin(V)
        c, s = np.cos(omega * t), np.sin(omega * t)
        return np.stack([x, c * y - s * z, s * y + c * z], axis=-1)
    return Motion("rotating_torus", "torus", pos, time_scale=1.0 / omega)


def swirling_torus(major=2.0, minor=0.5, omega_u=1.0, omega_v=0.5):
    """Static torus with chart points sliding along both angles (tangent flow)."""
    def pos(U, V, t):
        u, v = U + omega_u * t, V + omega_v * t
        ring = major + minor * np.cos(v)
        return np.stack([ring * np.cos(u), ring * np.sin(u), minor * np.sin(v)], axis=-1)
    return Motion("swirling_torus", "torus", pos, time_scale=1.0)


def breathing_torus(major=2.0, minor=0.5, amp=0.1, omega=1.0):
    """Tube radius ``minor (1 + amp sin(wt))``; normal motion with varying speed."""
    def pos(U, V, t):
        b = minor * (1 + amp * np.sin(omega * t))
        ring = major + b * np.cos(V)
        return np.stack([ring * np.cos(U), ring * np.sin(U), b * np.sin(V)], axis=-1)
    return Motion("breathing_torus", "torus", pos, time_scale=1.0 / omega)


def radial_wobble(r0=1.0, eps=0.05, omega=1.0):
    """Radial graph ``r0 (1 + eps sin(wt) P2(cos theta))``."""
    def pos(U, V, t):
        p2 = 0.5 * (3 * np.cos(U) ** 2 - 1)
        r = r0 * (1 + eps * np.sin(omega * t) * p2)
        return r[..., None] * _unit(U, V)
    return Motion("radial_wobble", "sphere", pos, time_scale=1.0 / omega)


def stretching_patch(stretch=0.2, amp=0.1, drift=0.1):
    """Open graph patch over a chart on [0,1]^2 whose boundary moves.

    ``x = u (1 + stretch t)``, ``y = v + drift t sin(pi u)``,
    ``z = amp (1 + t) sin(pi x) sin(pi y)``.
    """
    def pos(U, V, t):
        x = U * (1 + stretch * t)
        y = V + drift * t * np.sin(np.pi * U)
        z = amp * (1 + t) * np.sin(np.pi * x) * np.sin(np.pi * y)
        return np.stack([x, y, z], axis=-1)
    return Motion("stretching_patch", "patch", pos, time_scale=1.0, closed=False)


MOTIONS = {
    "expanding_sphere": expanding_sphere,
    "translating_sphere": translating_sphere,
    "rotating_sphere": rotating_sphere,
    "oscillating_ellipsoid": oscillating_ellipsoid,
    "isochoric_ellipsoid": isochoric_ellipsoid,
    "rotating_torus": rotating_torus,
    "swirling_torus": swirling_torus,
    "breathing_torus": breathing_torus,
    "radial_wobble": radial_wobble,
    "stretching_patch": stretching_patch,
}


def make_motion(name, **params):
    from .errors import UnknownShapeError

    try:
        return MOTIONS[name](**params)
    except KeyError:
        raise UnknownShapeError(f"unknown motion {name!r}") from None
