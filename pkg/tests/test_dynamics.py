import numpy as np
import pytest

from mmcalc import dynamics as dyn
from mmcalc import motions as mo
from mmcalc import transport as tr
from mmcalc.chart import ChartGrid
from mmcalc.errors import InstabilityError, MMError, StepInstabilityError
from mmcalc.shapes import Sphere, embed
from mmcalc.suites import wave_setup

from conftest import max_err


def sphere_start(n=24, r0=1.0, order=6):
    chart = ChartGrid.latlong(n, n, order=order)
    return chart, embed(chart, Sphere(r0))


def test_zero_tension_moves_at_constant_speed():
    chart, R0 = sphere_start()
    tr_ = dyn.evolve_compressible(chart, R0, 0.2, 1.0, 0.0, 0.05, 20)
    t = np.asarray(tr_.t)
    assert np.allclose(tr_.final_C, 0.2, atol=0, rtol=0)
    assert np.max(np.abs(np.asarray(tr_.support) - (1 + 0.2 * t))) < 1e-9
    assert np.max(np.abs(np.asarray(tr_.R_mean) - (1 + 0.2 * t))) < 1e-9


def test_mass_is_conserved_to_roundoff():
    chart, R0 = sphere_start()
    tr_ = dyn.evolve_compressible(chart, R0, 0.0, 1.0, 0.5, 0.01, 40, curvature_sign=-1)
    m = np.asarray(tr_.mass)
    assert np.max(np.abs(m / m[0] - 1)) < 1e-12
    assert np.asarray(tr_.area)[-1] != pytest.approx(tr_.area[0], rel=1e-6)


def test_step_limits_are_enforced():
    chart, R0 = sphere_start()
    with pytest.raises(StepInstabilityError):
        dyn.evolve_compressible(chart, R0, 0.0, 1.0, 0.5, 1.0, 2)
    with pytest.raises(StepInstabilityError):
        dyn.evolve_compressible(chart, R0, 50.0, 1.0, 0.0, 0.1, 2)
    with pytest.raises(ValueError):
        dyn.evolve_compressible(chart, R0, 0.0, 1.0, -1.0, 0.01, 2)
    with pytest.raises(ValueError):
        dyn.evolve_compressible(chart, R0, 0.0, 1.0, 0.5, 0.0, 2)


def test_short_run_follows_radial_oracle():
    chart, R0 = sphere_start(32)
    lam, rho0 = 0.5, 1.0
    T = dyn.oscillation_period(rho0, 1.0, lam)
    limit = dyn.rk4_step_limit(chart, dyn.normal_state(chart, R0), np.ones(chart.shape), lam)
    steps = int(np.ceil(0.25 * T / (0.9 * limit)))
    tr_ = dyn.evolve_compressible(chart, R0, 0.0, rho0, lam, 0.25 * T / steps, steps, curvature_sign=-1)
    r, _ = dyn.radial_oracle(1.0, 0.0, rho0, lam, tr_.t, curvature_sign=-1)
    assert np.max(np.abs(np.asarray(tr_.support) - r)) < 1e-5
    # a quarter period of the restoring motion passes through the origin
    assert abs(r[-1]) < 1e-9


def test_oscillation_period_matches_oracle():
    for rho0, r0, lam in [(1.0, 1.0, 0.5), (2.0, 1.5, 0.3)]:
        T = dyn.oscillation_period(rho0, r0, lam)
        r, c = dyn.radial_oracle(r0, 0.0, rho0, lam, np.linspace(0, T, 9), curvature_sign=-1)
        assert r[-1] == pytest.approx(r0, abs=1e-10)
        assert abs(c[-1]) < 1e-9
        assert r[4] == pytest.approx(-r0, abs=1e-10)


def test_oracle_grows_without_restoring_sign():
    r, _ = dyn.radial_oracle(1.0, 0.0, 1.0, 0.5, [0.0, 1.0], curvature_sign=1)
    assert r[-1] == pytest.approx(np.cosh(1.0), rel=1e-10)


@pytest.fixture(scope="module")
def strip():
    return wave_setup(64)


def test_zero_wave_stays_zero(strip):
    geom, mode = strip
    tr_ = dyn.evolve_wave(0 * mode, 0 * mode, 1.0, geom, 0.005, 20)
    assert np.all(tr_.C == 0) and np.all(tr_.energy == 0)
    assert tr_.energy_drift == 0.0


def test_wave_frequency_energy_and_reversibility(strip):
    geom, mode = strip
    gamma = 2.0
    omega = np.sqrt(gamma) * 2 * np.pi
    dt = 2 * np.pi / omega / 100
    tr_ = dyn.evolve_wave(mode, 0 * mode, gamma, geom, dt, 300, mode=mode)
    assert dyn.zero_crossing_frequency(tr_.t, tr_.modal) == pytest.approx(omega, rel=1e-2)
    assert tr_.energy_drift < 1e-3
    back = dyn.evolve_wave(tr_.C, -tr_.C_dot, gamma, geom, dt, 300, record_every=300)
    assert max_err(back.C, mode) < 1e-10
    assert max_err(back.C_dot, 0.0) < 1e-8


def test_anti_diffusive_branch_grows_like_cosh(strip):
    geom, mode = strip
    omega = 2 * np.pi
    tr_ = dyn.evolve_wave(mode, 0 * mode, 1.0, geom, 0.002, 250, wave_sign=-1, mode=mode, allow_growth=True)
    assert tr_.modal[-1] == pytest.approx(np.cosh(omega * 0.5), rel=1e-4)
    with pytest.raises(InstabilityError):
        dyn.evolve_wave(mode, 0 * mode, 1.0, geom, 0.01, 500, wave_sign=-1, growth_limit=100.0)


def test_wave_argument_checks(strip):
    geom, mode = strip
    with pytest.raises(StepInstabilityError):
        dyn.evolve_wave(mode, 0 * mode, 1.0, geom, 1.0, 2)
    with pytest.raises(ValueError):
        dyn.evolve_wave(mode, 0 * mode, 0.0, geom, 0.01, 2)
    with pytest.raises(ValueError):
        dyn.evolve_wave(mode, 0 * mode, 1.0, geom, 0.01, 2, wave_sign=0)


def test_zero_crossing_frequency():
    t = np.linspace(0, 10, 2001)
    assert dyn.zero_crossing_frequency(t, np.cos(3 * t)) == pytest.approx(3.0, rel=1e-5)
    with pytest.raises(MMError):
        dyn.zero_crossing_frequency(t[:10], np.cos(t[:10]))


def test_mass_law_on_expanding_sphere():
    # rho ~ 1 / R^2 keeps rho * area fixed
    m = tr.MovingSurface(mo.expanding_sphere(1.0, 0.1), ChartGrid.latlong(32))
    rho_fn = lambda g, s: 1.0 / np.sum(g.R**2, axis=-1)
    geom, vel, rho_dot, C_dot, V_dot = dyn.moving_rates(m, 0.4, rho_fn)
    rho = rho_fn(geom, 0.4)
    # limited by the discrete mean curvature at this resolution
    assert max_err(dyn.mass_conservation_residual(rho_dot, rho, vel, geom), 0.0, geom.mask) < 5e-5
    assert max_err(C_dot, 0.0, geom.mask) < 1e-8
    # a density that ignores the expansion violates the law by 2 rho C / R
    bad = dyn.mass_conservation_residual(0 * rho, np.ones_like(rho), vel, geom)
    assert max_err(bad, 2 * 0.1 / 1.04, geom.mask) < 5e-5


def test_surface_divergence_of_normal_field():
    chart, R0 = sphere_start(32)
    from mmcalc.geometry import build_geometry

    g = build_geometry(chart, 2.0 * R0)
    div = dyn.surface_divergence(np.zeros(chart.shape + (2,)), np.ones(chart.shape), g)
    assert max_err(div, 1.0, g.mask) < 1e-6


def test_static_sphere_normal_balance():
    # at rest the normal equation reduces to Lambda B^i_i - P; a sphere balances P = Lambda H
    m = tr.MovingSurface(mo.expanding_sphere(1.0, 0.0), ChartGrid.latlong(32))
    geom, vel, _, C_dot, V_dot = dyn.moving_rates(m, 0.0)
    mat = dyn.MaterialFields(np.ones(geom.chart.shape), Lambda=0.7, P=0.7 * -2.0)
    mass, normal, tangent = dyn.grinfeld_residuals(0 * C_dot, C_dot, V_dot, vel, mat, geom)
    assert max_err(mass, 0.0, geom.mask) < 1e-10
    assert max_err(normal, 0.7 * -2.0, geom.mask) < 1e-4
    assert max_err(dyn.normal_momentum_integrand(C_dot, vel, mat, geom), 0.0, geom.mask) < 1e-4
    assert max_err(tangent, 0.0, geom.mask) < 1e-10
    with pytest.raises(ValueError):
        dyn.MaterialFields(np.zeros(3))
