import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmcalc import geometry as geo
from mmcalc import motions as mo
from mmcalc import transport as tr
from mmcalc.chart import ChartGrid
from mmcalc.errors import ChartError, MissingSamplesError, UnknownShapeError

from conftest import max_err


def probe(g, t):
    R = g.R
    return 1.0 + (R[..., 0] + 0.3) ** 2 + R[..., 1] ** 2 + np.sin(t) * R[..., 2]


def field(x, t):
    return 1.0 + (x[..., 0] + 0.3) ** 2 + t * x[..., 1] + x[..., 2] ** 3 + x[..., 1] * x[..., 2]


def chart_for(motion, n=48):
    if motion.topology == "sphere":
        return ChartGrid.latlong(n)
    if motion.topology == "torus":
        return ChartGrid.torus(n)
    return ChartGrid.patch(n)


@given(st.lists(st.floats(-5, 5), min_size=5, max_size=5), st.floats(0.01, 1.0))
def test_time_derivative_exact_on_quartics(c, dt):
    t = np.arange(-2, 3) * dt
    f = sum(ci * t**i for i, ci in enumerate(c))
    assert tr.time_derivative(list(f), dt) == pytest.approx(c[1], abs=1e-9 * (1 + max(map(abs, c))) / dt)


def test_time_derivative_needs_samples():
    with pytest.raises(MissingSamplesError):
        tr.time_derivative([1.0, 2.0, 3.0, 4.0], 0.1)
    with pytest.raises(MissingSamplesError):
        tr.time_derivative(None, 0.1)
    assert tr.time_derivative([1.0, 2.0, 3.0], 0.5) == 2.0


def test_expanding_sphere_velocity_is_normal():
    m = tr.MovingSurface(mo.expanding_sphere(1.0, 0.1), ChartGrid.latlong(32))
    v = m.velocity(0.0)
    assert max_err(v.C, 0.1) < 1e-10
    assert np.max(np.abs(v.V_tan)) < 1e-10
    assert tr.reconstruction_error(v, m.geometry(0.0)) < 1e-12


def test_translating_sphere_normal_speed():
    m = tr.MovingSurface(mo.translating_sphere(1.0, (0.0, 0.0, 1.0)), ChartGrid.latlong(32))
    g = m.geometry(0.2)
    v = m.velocity(0.2)
    assert max_err(v.C, g.N[..., 2]) < 1e-9
    assert abs(tr.incompressibility_residual(v, g)) < 1e-9


def rel(check):
    return abs(check.residual) / abs(check.rhs)


@pytest.mark.parametrize("name", ["rotating_sphere", "rotating_torus"])
def test_rigid_motions_preserve_the_metric(name):
    motion = mo.make_motion(name)
    errs = []
    for n in (48, 96):
        m = tr.MovingSurface(motion, chart_for(motion, n))
        t = 0.3
        v, g = m.velocity(t), m.geometry(t)
        errs.append(np.max(np.abs(tr.metric_rate(v, g))))
        # the metric is covariantly constant in space, hence also in time
        assert np.max(np.abs(m.covariant_time_derivative(lambda g, s: g.metric, t, "dd"))) < 1e-3
        assert abs(tr.incompressibility_residual(v, g)) < 1e-10
    assert errs[1] < 1e-5
    assert np.log2(errs[0] / errs[1]) > 3.5


@pytest.mark.parametrize("name", ["oscillating_ellipsoid", "breathing_torus", "radial_wobble", "swirling_torus"])
def test_metric_and_area_rates_match_time_differences(name):
    motion = mo.make_motion(name)
    m = tr.MovingSurface(motion, chart_for(motion, 64))
    t = 0.4
    v, g = m.velocity(t), m.geometry(t)
    dS = tr.time_derivative(m.samples(lambda g, s: g.metric, t), m.dt_probe)
    assert max_err(dS, tr.metric_rate(v, g)) < 5e-5
    da = tr.time_derivative(m.samples(lambda g, s: g.sqrtS, t), m.dt_probe)
    assert max_err(da, tr.area_element_rate(v, g)) < 5e-5


def test_isochoric_motion_has_zero_flux():
    m = tr.MovingSurface(mo.isochoric_ellipsoid(), ChartGrid.latlong(64))
    t = 0.7
    assert abs(tr.incompressibility_residual(m.velocity(t), m.geometry(t))) < 1e-7
    vols = [m.geometry(s).volume for s in m.probe_times(t)]
    assert abs(tr.time_derivative(vols, m.dt_probe)) < 1e-6


@pytest.mark.parametrize("name", ["oscillating_ellipsoid", "rotating_torus", "breathing_torus", "radial_wobble"])
def test_surface_and_space_transport(name):
    motion = mo.make_motion(name)
    m = tr.MovingSurface(motion, chart_for(motion, 64))
    s = tr.check_surface_transport(probe, m, 0.3)
    assert s.contour == 0.0
    assert rel(s) < 1e-4
    v = tr.check_space_transport(field, m, 0.3)
    assert rel(v) < 1e-4


def test_open_patch_needs_the_contour_term():
    m = tr.MovingSurface(mo.stretching_patch(), ChartGrid.patch(64))
    f = lambda g, t: 1 + g.R[..., 0] * g.R[..., 1]
    with_edge = tr.check_surface_transport(f, m, 0.2)
    without = tr.check_surface_transport(f, m, 0.2, contour=False)
    assert rel(with_edge) < 1e-4
    assert rel(without) > 0.5
    with pytest.raises(ChartError):
        tr.check_space_transport(field, m, 0.2)
    with pytest.raises(ChartError):
        tr.incompressibility_residual(m.velocity(0.2), m.geometry(0.2))


def test_contour_rejected_on_closed_surface():
    m = tr.MovingSurface(mo.expanding_sphere(), ChartGrid.latlong(16))
    with pytest.raises(ChartError):
        tr.check_surface_transport(probe, m, 0.0, contour=True)


@pytest.mark.parametrize("name", ["oscillating_ellipsoid", "breathing_torus"])
def test_mean_curvature_rate_theorem(name):
    motion = mo.make_motion(name)
    errs = []
    for n in (32, 64):
        m = tr.MovingSurface(motion, chart_for(motion, n))
        t = 0.5
        lhs = m.covariant_time_derivative(lambda g, s: g.H, t)
        rhs = tr.mean_curvature_rate(m.velocity(t), m.geometry(t))
        errs.append(max_err(lhs, rhs) / np.max(np.abs(rhs)))
    assert errs[1] < 1e-3
    assert np.log2(errs[0] / errs[1]) > 2


def test_covariant_time_derivative_shape_and_finiteness():
    m = tr.MovingSurface(mo.rotating_sphere(), ChartGrid.latlong(48))
    t = 0.2
    v, g = m.velocity(t), m.geometry(t)
    samples = [m.velocity(s).V_tan for s in m.probe_times(t)]
    d = tr.covariant_time_derivative(samples, m.dt_probe, v, m.time_christoffel(t), g, "u")
    assert d.shape == g.chart.shape + (2,)
    assert np.all(np.isfinite(d[g.mask]))


def test_unknown_motion_and_bad_probe():
    with pytest.raises(UnknownShapeError):
        mo.make_motion("melting_sphere")
    with pytest.raises(ValueError):
        tr.MovingSurface(mo.expanding_sphere(), ChartGrid.latlong(16), dt_probe=-1.0)


def test_geometry_cache_is_reused():
    m = tr.MovingSurface(mo.expanding_sphere(), ChartGrid.latlong(16))
    assert m.geometry(0.5) is m.geometry(0.5)
    assert m.geometry(0.5).area == pytest.approx(4 * np.pi * 1.05**2, rel=2e-3)
