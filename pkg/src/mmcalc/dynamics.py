"""Surface-dynamics residuals and time integration of reduced regimes.

Sign conventions follow :mod:`mmcalc.geometry`: the normal is outward, so a
sphere has ``H = -2/r``. ``curvature_sign`` multiplies the curvature force in
the compressible system; ``curvature_sign=-1`` turns the literal force law into
the restoring one (see :func:`evolve_compressible`).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import geometry as geo
from .errors import InstabilityError, MMError, StepInstabilityError


@dataclass(frozen=True, eq=False)
class MaterialFields:
    rho: np.ndarray
    Lambda: np.ndarray = 0.0
    P: np.ndarray = 0.0
    F: np.ndarray = None

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        if not np.all(rho[np.isfinite(rho)] > 0):
            raise ValueError("surface density must be positive")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "Lambda", np.asarray(self.Lambda, dtype=float))
        object.__setattr__(self, "P", np.asarray(self.P, dtype=float))


# -- residuals of the full system ------------------------------------------

def mass_conservation_residual(rho_dot, rho, vel, geom):
    """``nabla-dot rho + nabla_i(rho V^i) - rho C B^i_i``."""
    flux = rho[..., None] * vel.V_tan
    return rho_dot + geo.divergence(flux, geom) - rho * vel.C * geom.H


def surface_divergence(W_tan, W_n, geom, normal_derivative=0.0):
    """Ambient divergence of ``W = W_n N + W^i S_i`` restricted to the surface.

    Uses ``div W = nabla_i W^i + d_n W_n + W_n div N`` with ``div N = -B^i_i``
    for the outward normal; ``d_n W_n`` defaults to zero for surface-only data.
    """
    return geo.divergence(W_tan, geom) + normal_derivative - W_n * geom.H


def normal_momentum_integrand(C_dot, vel, mat, geom):
    """``rho (nabla-dot C + 2 V^i nabla_i C + V^a V^b B_ab) - P + Lambda B^i_i``."""
    gradC = geom.chart.gradient(vel.C)
    VVB = np.einsum("...a,...b,...ab->...", vel.V_tan, vel.V_tan, geom.B)
    inertia = C_dot + 2 * np.einsum("...i,...i->...", vel.V_tan, gradC) + VVB
    return mat.rho * inertia - mat.P + mat.Lambda * geom.H


def normal_momentum_residual(C_dot, vel, mat, geom, dP_dt=0.0, div_dF_dt=0.0,
                             ambient_divergence=None):
    """Residual of the normal equation.

    ``d_alpha[V^alpha Phi] - d_t P - d_alpha d_t F^alpha`` with ``Phi`` from
    :func:`normal_momentum_integrand`. The ambient divergence defaults to the
    surface restriction of :func:`surface_divergence`; pass a callable
    ``ambient_divergence(Phi)`` to supply it directly.
    """
    phi = normal_momentum_integrand(C_dot, vel, mat, geom)
    if ambient_divergence is None:
        div = surface_divergence(phi[..., None] * vel.V_tan, phi * vel.C, geom)
    else:
        div = ambient_divergence(phi)
    return div - dP_dt - div_dF_dt


def tangent_momentum_residual(V_dot, vel, mat, geom):
    """``rho (nabla-dot V^i + V^k nabla_k V^i - C nabla^i C - C V^k B^i_k) + nabla^i Lambda``."""
    dV = geo.covariant_derivative(vel.V_tan, geom, "u")
    adv = np.einsum("...k,...ki->...i", vel.V_tan, dV)
    gradC = geo.raise_index(geom.chart.gradient(vel.C), geom)
    VB = np.einsum("...k,...ik->...i", vel.V_tan, geom.Bmix)
    inertia = V_dot + adv - vel.C[..., None] * gradC - vel.C[..., None] * VB
    lam = np.broadcast_to(mat.Lambda, geom.chart.shape)
    gradL = geo.raise_index(geom.chart.gradient(lam), geom)
    return mat.rho[..., None] * inertia + gradL


def grinfeld_residuals(rho_dot, C_dot, V_dot, vel, mat, geom):
    """Residuals of the constant-field (thin film) system.

    Returns ``(mass, normal, tangent)`` with
    normal ``= rho (nabla-dot C + 2 V^i nabla_i C + V^a V^b B_ab) + Lambda B^i_i``.
    """
    mass = mass_conservation_residual(rho_dot, mat.rho, vel, geom)
    normal = normal_momentum_integrand(C_dot, vel, mat, geom) + mat.P
    tangent = tangent_momentum_residual(V_dot, vel, mat, geom)
    return mass, normal, tangent


def moving_rates(moving, t, rho_fn=None):
    """Covariant time derivatives of ``rho``, ``C`` and ``V^i`` along a prescribed motion.

    ``rho_fn(geometry, time)`` gives the density; the normal speed and tangent
    components come from the motion itself.
    """
    from .transport import covariant_time_derivative, time_derivative

    geom = moving.geometry(t)
    vel = moving.velocity(t)
    gdot = moving.time_christoffel(t)
    times = moving.probe_times(t)
    vels = [moving.velocity(s) for s in times]
    C_dot = covariant_time_derivative([v.C for v in vels], moving.dt_probe, vel, gdot, geom)
    V_dot = covariant_time_derivative([v.V_tan for v in vels], moving.dt_probe, vel, gdot, geom, "u")
    rho_dot = None
    if rho_fn is not None:
        rho_dot = moving.covariant_time_derivative(rho_fn, t)
    return geom, vel, rho_dot, C_dot, V_dot


# -- reduced compressible system -------------------------------------------

@dataclass
class CompressibleTrajectory:
    t: list = field(default_factory=list)
    R_mean: list = field(default_factory=list)
    C_max: list = field(default_factory=list)
    H_mean: list = field(default_factory=list)
    area: list = field(default_factory=list)
    volume: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    rho_mean: list = field(default_factory=list)
    support: list = field(default_factory=list)
    final_R: np.ndarray = None
    final_C: np.ndarray = None
    final_rho: np.ndarray = None

    COLUMNS = ("t", "R_mean", "C_max", "H_mean", "area", "volume", "mass")

    def rows(self):
        return [tuple(getattr(self, c)[k] for c in self.COLUMNS) for k in range(len(self.t))]


def _mean(x, mask):
    return float(np.mean(x[mask]))


@dataclass(frozen=True, eq=False)
class NormalState:
    N: np.ndarray
    H: np.ndarray
    sqrtS: np.ndarray
    inv_metric: np.ndarray


def normal_state(chart, R):
    """Normal, mean curvature and area element without Christoffel symbols.

    ``N`` is orthogonal to both base vectors to roundoff, so
    ``B_ij = N . d_i d_j R`` equals the full ``N . (d_i S_j - Gamma^k_ij S_k)``.
    """
    S = geo.covariant_basis(R, chart)
    d2R = geo.second_derivatives(R, chart)
    metric, inv, sqrtS = geo.first_fundamental(S, chart.mask)
    N = geo.unit_normal(S, chart.mask)
    B = np.einsum("...ija,...a->...ij", d2R, N)
    H = np.einsum("...ij,...ij->...", inv, B)
    return NormalState(N, H, sqrtS, inv)


def rk4_step_limit(chart, state, rho, Lambda):
    """Stability estimate for RK4 on the surface waves carried by the system.

    Linearising ``d_t^2 r = (Lambda/rho) (Delta r + ...)`` gives grid
    frequencies up to ``sqrt(Lambda/rho * lam_max)`` with ``lam_max`` the
    largest eigenvalue of the discrete Laplacian; RK4 is stable for
    ``omega dt < 2.78`` on the imaginary axis.
    """
    from .fd import CENTERED

    sten = CENTERED[2][chart.order]
    symbol = abs(sum(w * np.cos(np.pi * off) for off, w in sten))
    inv = state.inv_metric[chart.mask]
    lam_max = symbol * np.max(inv[:, 0, 0] / chart.h_u**2 + inv[:, 1, 1] / chart.h_v**2)
    speed2 = np.max(np.broadcast_to(Lambda, chart.shape)[chart.mask] / rho[chart.mask])
    if speed2 <= 0:
        return np.inf
    return 2.78 / np.sqrt(speed2 * lam_max)


def evolve_compressible(chart, R0, C0, rho0, Lambda, dt, n_steps, *, curvature_sign=1,
                        closed=True, record_every=1, cfl=0.25):
    """RK4 integration of the reduced system with vanishing tangent velocity.

    State per node: position ``R``, normal speed ``C`` and the conserved mass
    density per unit chart area ``m = rho sqrt(S)``. With ``V^i = 0`` the mass
    law ``d_t rho = rho C B^i_i`` integrates exactly to ``m = const`` because
    ``d_t sqrt(S) = -C B^i_i sqrt(S)``. The remaining equations are

        d_t R = C N,   d_t C = -curvature_sign * Lambda B^i_i / rho.

    The step must satisfy ``dt <= cfl * min(h_u, h_v) / max|C|`` in chart units
    and the RK4 bound of :func:`rk4_step_limit`; a violation of either raises
    :class:`StepInstabilityError`.
    """
    if Lambda is None or np.any(np.asarray(Lambda) < 0):
        raise ValueError("Lambda must be non-negative")
    if not dt > 0 or n_steps < 0:
        raise ValueError("need dt > 0 and n_steps >= 0")
    sigma = float(curvature_sign)
    mask = chart.mask
    hmin = min(chart.h_u, chart.h_v)
    lam = np.broadcast_to(np.asarray(Lambda, dtype=float), chart.shape)

    R = np.array(R0, dtype=float)
    g = normal_state(chart, R)
    C = np.broadcast_to(np.asarray(C0, dtype=float), chart.shape).copy()
    m = np.broadcast_to(np.asarray(rho0, dtype=float), chart.shape) * g.sqrtS
    w = np.where(mask, chart.weights, 0.0)
    traj = CompressibleTrajectory()

    def rhs(R, C, g=None):
        if g is None:
            g = normal_state(chart, R)
        # -Lambda H / rho written with m to stay finite as the surface shrinks
        dC = -sigma * lam * g.H * g.sqrtS / m
        return C[..., None] * g.N, dC, g

    def record(t, R, g, C):
        rho = m / g.sqrtS
        dS = w * g.sqrtS
        traj.t.append(t)
        traj.R_mean.append(_mean(np.linalg.norm(R, axis=-1), mask))
        traj.C_max.append(float(np.max(np.abs(C[mask]))))
        traj.H_mean.append(_mean(g.H, mask))
        traj.area.append(float(np.sum(dS)))
        vol = np.sum(dS * np.einsum("...a,...a->...", R, g.N)) / 3 if closed else np.nan
        traj.volume.append(float(vol))
        traj.mass.append(float(np.sum(np.where(mask, rho * dS, 0.0))))
        traj.rho_mean.append(_mean(rho, mask))
        # mean of R . N: the signed radius for spheres passing through the origin
        traj.support.append(_mean(np.einsum("...a,...a->...", R, g.N), mask))

    t = 0.0
    for step in range(n_steps):
        cmax = float(np.max(np.abs(C[mask])))
        if cmax > 0 and dt > cfl * hmin / cmax:
            raise StepInstabilityError(
                f"dt={dt:g} exceeds {cfl} * h / max|C| = {cfl * hmin / cmax:g} at step {step}")
        limit = rk4_step_limit(chart, g, m / g.sqrtS, lam)
        if dt > limit:
            raise StepInstabilityError(f"dt={dt:g} exceeds the RK4 wave limit {limit:g} at step {step}")
        if step % record_every == 0:
            record(t, R, g, C)
        k1R, k1C, _ = rhs(R, C, g)
        k2R, k2C, _ = rhs(R + 0.5 * dt * k1R, C + 0.5 * dt * k1C)
        k3R, k3C, _ = rhs(R + 0.5 * dt * k2R, C + 0.5 * dt * k2C)
        k4R, k4C, _ = rhs(R + dt * k3R, C + dt * k3C)
        R = R + dt / 6 * (k1R + 2 * k2R + 2 * k3R + k4R)
        C = C + dt / 6 * (k1C + 2 * k2C + 2 * k3C + k4C)
        t = (step + 1) * dt
        g = normal_state(chart, R)
    record(t, R, g, C)
    traj.final_R, traj.final_C, traj.final_rho = R, C, m / g.sqrtS
    return traj


def radial_oracle(r0, c0, rho0, Lambda, times, curvature_sign=1):
    """Independent radial ODE for a sphere of radius ``r``.

    ``rho(r) r'' = -curvature_sign * Lambda * H(r)`` with ``H = -2/r`` and
    ``rho = rho0 r0^2 / r^2`` (mass conservation).
    """
    k = 2.0 * curvature_sign * Lambda / (rho0 * r0**2)

    def f(t, y):
        return [y[1], k * y[0]]

    times = np.asarray(times, dtype=float)
    sol = solve_ivp(f, (0.0, float(times[-1])), [r0, c0], method="DOP853",
                    t_eval=times, rtol=1e-13, atol=1e-15)
    if not sol.success:
        raise MMError(sol.message)
    return sol.y[0], sol.y[1]


def oscillation_period(rho0, r0, Lambda):
    """Period of the restoring radial oscillation ``2 pi r0 sqrt(rho0 / (2 Lambda))``."""
    return 2 * np.pi * r0 * np.sqrt(rho0 / (2 * Lambda))


# -- linear wave regime ----------------------------------------------------

@dataclass
class WaveTrajectory:
    t: np.ndarray
    energy: np.ndarray
    modal: np.ndarray
    C: np.ndarray
    C_dot: np.ndarray

    @property
    def energy_drift(self):
        e0 = self.energy[0]
        return float(np.max(np.abs(self.energy - e0)) / abs(e0)) if e0 else float(np.max(np.abs(self.energy)))


def wave_energy(C, C_dot, gamma, geom):
    """``int (C_dot^2 + gamma S^ij d_i C d_j C + 2 gamma K C^2) dS``.

    The ``K`` term makes the energy exact for the curved operator; it vanishes
    on flat patches.
    """
    grad = geom.chart.gradient(C)
    g2 = np.einsum("...ij,...i,...j->...", geom.inv_metric, grad, grad)
    return float(geo.integrate_surface(C_dot**2 + gamma * g2 + 2 * gamma * geom.K * C**2, geom))


def wave_step_limit(geom, gamma):
    """Largest stable leapfrog step for the discrete operator (no safety factor)."""
    from .fd import CENTERED

    sten = CENTERED[2][geom.chart.order]
    symbol = abs(sum(w * np.cos(np.pi * off) for off, w in sten))
    inv = geom.inv_metric[geom.mask]
    lam_max = symbol * (np.max(inv[:, 0, 0]) / geom.chart.h_u**2 + np.max(inv[:, 1, 1]) / geom.chart.h_v**2)
    lam_max += 2 * np.max(np.abs(geom.K[geom.mask]))
    return 2.0 / np.sqrt(gamma * lam_max)


def evolve_wave(C0, C_dot0, gamma, geom, dt, n_steps, *, wave_sign=1, mode=None,
                record_every=1, growth_limit=1e6, allow_growth=False):
    """Leapfrog (velocity Verlet) for ``d_t^2 C = wave_sign * gamma (Delta C - 2 K C)``.

    ``mode`` is an optional field to project ``C`` on each recorded step.
    ``wave_sign=-1`` grows exponentially on flat patches; growth beyond
    ``growth_limit`` times the initial amplitude raises
    :class:`InstabilityError` unless ``allow_growth`` is set.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if wave_sign not in (1, -1):
        raise ValueError("wave_sign must be +1 or -1")
    if wave_sign == 1 and dt >= wave_step_limit(geom, gamma):
        raise StepInstabilityError("leapfrog step exceeds the stability limit")
    C = np.array(C0, dtype=float)
    V = np.array(C_dot0, dtype=float)
    mask = geom.mask

    def accel(C):
        return wave_sign * gamma * (geo.laplace_beltrami(C, geom) - 2 * geom.K * C)

    if mode is not None:
        w = geom.chart.weights * geom.sqrtS
        norm = np.sum(w * mode * mode)
        project = lambda c: float(np.sum(w * mode * c) / norm)
    else:
        project = lambda c: float("nan")

    amp0 = max(float(np.max(np.abs(C[mask]))), float(np.max(np.abs(V[mask]))) * dt, np.finfo(float).tiny)
    ts, es, ms = [], [], []
    a = accel(C)
    for step in range(n_steps + 1):
        if step % record_every == 0 or step == n_steps:
            ts.append(step * dt)
            es.append(wave_energy(C, V, gamma, geom))
            ms.append(project(C))
        if step == n_steps:
            break
        V_half = V + 0.5 * dt * a
        C = C + dt * V_half
        a = accel(C)
        V = V_half + 0.5 * dt * a
        if not allow_growth and float(np.max(np.abs(C[mask]))) > growth_limit * amp0:
            raise InstabilityError(f"wave amplitude grew beyond {growth_limit:g}x at step {step + 1}")
    return WaveTrajectory(np.array(ts), np.array(es), np.array(ms), C, V)


def zero_crossing_frequency(t, signal):
    """Angular frequency from the mean spacing of sign changes (linear interpolation)."""
    t = np.asarray(t)
    s = np.asarray(signal)
    idx = np.nonzero(np.signbit(s[:-1]) != np.signbit(s[1:]))[0]
    idx = idx[s[idx] != s[idx + 1]]
    if idx.size < 2:
        raise MMError("need at least two zero crossings to measure a frequency")
    tc = t[idx] - s[idx] * (t[idx + 1] - t[idx]) / (s[idx + 1] - s[idx])
    half_period = (tc[-1] - tc[0]) / (tc.size - 1)
    return np.pi / half_period
