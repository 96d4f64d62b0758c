"""Verification suites run by the ``mm`` command.

Each suite turns an :class:`ExperimentConfig` into a list of
:class:`ReportRow`. Cases inside a suite are independent and may run on a
thread pool capped by ``MM_THREADS``; rows are always assembled in case order
so output does not depend on scheduling.
"""

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields as dc_fields

import numpy as np

from . import closed_form as cf
from . import dynamics as dyn
from . import laws
from . import ns
from .chart import ChartGrid
from .config import ConfigError
from .geometry import build_geometry, geometry_of, geometry_table
from .motions import make_motion
from .report import make_row, observed_order, table_csv, write_text
from .rng import XorShift64Star
from .shapes import Cylinder, Sphere, default_chart, embed, make_shape
from .transport import MovingSurface, check_space_transport, check_surface_transport, mean_curvature_rate

SHAPE_DEFAULTS = {
    "sphere": {"radius": 1.0},
    "torus": {"major": 2.0, "minor": 0.5},
    "ellipsoid": {"a": 1.0, "b": 1.2, "c": 0.8},
}
ROUNDOFF = 1e-12


def threads():
    try:
        return max(1, int(os.environ.get("MM_THREADS", "1")))
    except ValueError:
        raise ConfigError("MM_THREADS must be an integer") from None


def run_cases(cases):
    """Run zero-argument callables returning row lists; keep case order."""
    n = threads()
    if n == 1 or len(cases) < 2:
        results = [c() for c in cases]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(lambda c: c(), cases))
    return [row for rows in results for row in rows]


def _shape(name, cfg):
    base = dict(SHAPE_DEFAULTS.get(name, {}))
    shape = make_shape(name, **base)
    allowed = {f.name for f in dc_fields(shape)}
    extra = {k: v for k, v in cfg.params_for("shape").items() if k in allowed}
    return make_shape(name, **{**base, **extra}) if extra else shape


def _res(n):
    return f"{n}x{n}"


def _order_row(suite, case, ns_, errs, order_min):
    """Order row between the last two resolutions; at roundoff the check is vacuous."""
    e1, e2 = errs[-2], errs[-1]
    order = observed_order(e1, e2, ns_[-2], ns_[-1])
    if e1 <= ROUNDOFF and e2 <= ROUNDOFF:
        # no truncation error to measure (e.g. polynomial fields): nothing can fail
        return make_row(suite, case + ":order", f"{ns_[-2]}->{ns_[-1]}", 0.0, order_min, 0.0, 0.0)
    err = math.inf if order is None else max(0.0, order_min - order)
    return make_row(suite, case + ":order", f"{ns_[-2]}->{ns_[-1]}",
                    order if order is not None else 0.0, order_min, err, 0.0, order)


# -- geometry --------------------------------------------------------------

def geometry_suite(cfg):
    shapes = cfg.get("shapes", ["sphere", "torus", "ellipsoid"])
    res = cfg.get("resolutions", [32, 64])
    order = cfg.get("order", 4)
    layout = cfg.get("layout", "reflect")
    tol = cfg.get("tolerance", 1e-3)
    order_min = cfg.get("order_min", 2.0)

    def case(name):
        shape = _shape(name, cfg)
        rows, errs = [], {"H": [], "K": []}
        geom = None
        for n in res:
            chart = default_chart(shape, n, order=order, layout=layout)
            geom = geometry_of(shape, chart)
            exact = shape.exact_curvature(*chart.coords())
            if exact is None:
                raise ConfigError(f"shape {name!r} has no analytic curvature oracle")
            for key, num, ref in (("H", geom.H, exact[0]), ("K", geom.K, exact[1])):
                d = np.where(geom.mask, np.abs(num - ref), 0.0)
                i = np.unravel_index(np.argmax(d), d.shape)
                errs[key].append(float(d[i]))
                rows.append(make_row("geometry", f"{name}:{key}", _res(n), num[i], ref[i], d[i], tol))
        for key in ("H", "K"):
            rows.append(_order_row("geometry", f"{name}:{key}", res, errs[key], order_min))
        dump = cfg.get("dump")
        if dump and len(shapes) == 1:
            cols = ("node", "u", "v", "x", "y", "z", "H", "K")
            write_text(dump, table_csv(cols, geometry_table(geom)))
        return rows

    return run_cases([lambda s=s: case(s) for s in shapes])


# -- transport ------------------------------------------------------------

def _motion_chart(motion, n, order):
    if motion.topology == "sphere":
        return ChartGrid.latlong(n, n, order=order)
    if motion.topology == "torus":
        return ChartGrid.torus(n, n, order=order)
    return ChartGrid.patch(n, n, order=order)


def _surface_probe(g, t):
    R = g.R
    return 1.0 + (R[..., 0] + 0.3) ** 2 + R[..., 1] ** 2 + np.sin(t) * R[..., 2]


def _space_probe(x, t):
    return 1.0 + (x[..., 0] + 0.3) ** 2 + t * x[..., 1] + x[..., 2] ** 3 + x[..., 1] * x[..., 2]


def transport_suite(cfg):
    motions = cfg.get("motions", ["expanding_sphere", "rotating_torus"])
    res = cfg.get("resolutions", [64, 128])
    order = cfg.get("order", 4)
    tol = cfg.get("tolerance", 1e-4)
    order_min = cfg.get("order_min", 2.0)
    t = cfg.get("time", 0.3)
    dt_probe = cfg.get("dt_probe")
    params = cfg.params_for("motion")

    def case(name):
        motion = make_motion(name, **params)
        rows = []
        errs = {}
        for n in res:
            m = MovingSurface(motion, _motion_chart(motion, n, order), dt_probe=dt_probe)
            r = check_surface_transport(_surface_probe, m, t)
            rows.append(make_row("transport", f"{name}:surface", _res(n), r.lhs, r.rhs, r.relative, tol))
            errs.setdefault("surface", []).append(r.relative)
            if m.geometry(t).closed:
                r = check_space_transport(_space_probe, m, t)
                rows.append(make_row("transport", f"{name}:volume", _res(n), r.lhs, r.rhs, r.relative, tol))
                g, v = m.geometry(t), m.velocity(t)
                lhs = m.covariant_time_derivative(lambda g, s: g.H, t)
                rhs = mean_curvature_rate(v, g)
                # rigid motions have a zero rate: scale by H over the motion time scale
                scale = max(float(np.max(np.abs(rhs[g.mask]))),
                            float(np.max(np.abs(g.H[g.mask]))) / motion.time_scale)
                d = np.where(g.mask, np.abs(lhs - rhs), 0.0)
                i = np.unravel_index(np.argmax(d), d.shape)
                rows.append(make_row("transport", f"{name}:curvature_rate", _res(n),
                                     lhs[i], rhs[i], d[i] / scale, tol))
                errs.setdefault("curvature_rate", []).append(d[i] / scale)
        for key, e in errs.items():
            rows.append(_order_row("transport", f"{name}:{key}", res, e, order_min))
        return rows

    return run_cases([lambda s=s: case(s) for s in motions])


# -- evolve ----------------------------------------------------------------

def _compressible(cfg):
    n = cfg.get("resolutions", [40])[-1]
    order = cfg.get("order", 6)
    rho0 = cfg.get("rho0", 1.0)
    lam = cfg.get("lambda0", 0.5)
    c0 = cfg.get("c0", 0.0)
    sign = cfg.get("curvature_sign", -1)
    shape_name = cfg.get("shape", "sphere")
    if shape_name != "sphere":
        raise ConfigError("compressible evolution compares against the radial oracle and needs shape = sphere")
    r0 = _shape("sphere", cfg).radius
    chart = ChartGrid.latlong(n, n, order=order)
    R0 = embed(chart, Sphere(r0))
    if "dt" in cfg.values:
        dt = cfg.get("dt")
        steps = cfg.get("steps", 100)
    else:
        horizon = cfg.get("periods", 1.0) * (dyn.oscillation_period(rho0, r0, lam) if lam > 0 and sign < 0 else r0)
        limit = dyn.rk4_step_limit(chart, dyn.normal_state(chart, R0), np.full(chart.shape, rho0), lam)
        if c0:
            limit = min(limit, 0.25 * min(chart.h_u, chart.h_v) / abs(c0))
        steps = cfg.get("steps", int(math.ceil(horizon / (0.9 * limit))) | 1)
        dt = horizon / steps
    traj = dyn.evolve_compressible(chart, R0, c0, rho0, lam, dt, steps, curvature_sign=sign,
                                   record_every=cfg.get("record_every", 1))
    r, _ = dyn.radial_oracle(r0, c0, rho0, lam, traj.t, sign)
    sup = np.asarray(traj.support)
    err = float(np.max(np.abs(sup - r)) / np.max(np.abs(r)))
    mass = np.asarray(traj.mass)
    drift = float(np.max(np.abs(mass / mass[0] - 1)))
    path = cfg.get("trajectory")
    if path:
        write_text(path, table_csv(traj.COLUMNS, traj.rows()))
    res = _res(n)
    return [
        make_row("evolve", "compressible:radial_oracle", res, sup[-1], r[-1], err, 1e-6),
        make_row("evolve", "compressible:mass_drift", res, mass[-1], mass[0], drift, 1e-3),
    ]


def wave_setup(n, l=1.0, m=2, n_v=8, order=4):
    """Flat periodic strip of length ``2 l`` (a cylinder) and the mode ``sin(m pi u / l)``."""
    h = 2 * l / n
    chart = ChartGrid.patch(n, n_v, (0.0, 2 * l), (0.0, (n_v - 1) * h), periodic=(True, False), order=order)
    geom = build_geometry(chart, embed(chart, Cylinder(l / np.pi)), closed=False)
    U, _ = chart.coords()
    return geom, np.sin(m * np.pi * U / l)


def _wave(cfg):
    n = cfg.get("resolutions", [128])[-1]
    gamma = cfg.get("lambda0", 1.0) / cfg.get("rho0", 1.0)
    sign = cfg.get("wave_sign", 1)
    l, m = 1.0, 2
    geom, mode = wave_setup(n, l, m, order=cfg.get("order", 4))
    omega = math.sqrt(gamma) * m * math.pi / l
    res = f"{n}x8"
    if sign < 0:
        # anti-diffusive branch: C(t) = cosh(omega t) for zero initial velocity
        horizon = 3.0 / omega
        steps = 400
        tr = dyn.evolve_wave(mode, 0 * mode, gamma, geom, horizon / steps, steps, wave_sign=-1,
                             mode=mode, allow_growth=True)
        ref = math.cosh(omega * horizon)
        return [make_row("evolve", "wave:growth", res, tr.modal[-1], ref, abs(tr.modal[-1] / ref - 1), 1e-3)]
    period = 2 * math.pi / omega
    per = cfg.get("steps", 200)
    steps = int(round(cfg.get("periods", 10.0) * per))
    dt = period / per
    tr = dyn.evolve_wave(mode, 0 * mode, gamma, geom, dt, steps, mode=mode)
    freq = dyn.zero_crossing_frequency(tr.t, tr.modal)
    back = dyn.evolve_wave(tr.C, -tr.C_dot, gamma, geom, dt, steps, record_every=steps)
    rev = float(max(np.max(np.abs(back.C - mode)), np.max(np.abs(back.C_dot))))
    return [
        make_row("evolve", "wave:frequency", res, freq, omega, abs(freq - omega) / omega, 1e-2),
        make_row("evolve", "wave:energy_drift", res, tr.energy[-1], tr.energy[0], tr.energy_drift, 1e-3),
        make_row("evolve", "wave:reversibility", res, rev, 0.0, rev, 1e-8),
    ]


def evolve_suite(cfg):
    mode = cfg.get("mode", "both")
    cases = {"compressible": [_compressible], "wave": [_wave], "both": [_compressible, _wave]}
    if mode not in cases:
        raise ConfigError("mode must be compressible, wave or both")
    return run_cases([lambda f=f: f(cfg) for f in cases[mode]])


# -- verify ------------------------------------------------------------------

def _profile(xi):
    return xi * (1 - xi) * (1 + xi)


def verify_suite(cfg):
    seed = cfg.get("seed", 0)

    def radial():
        rng = XorShift64Star(seed)
        pts = np.array([[rng.uniform(-2, 2) for _ in range(3)] for _ in range(200)])
        pts = pts[np.linalg.norm(pts, axis=-1) > 0.5]
        V, div = cf.radial_velocity(1.0, pts)
        num = cf.numeric_divergence(lambda P: cf.radial_velocity(1.0, P)[0], pts, 1e-3)
        return [make_row("verify", "radial:analytic_divergence", "-", np.max(np.abs(div)), 0.0,
                         np.max(np.abs(div)), 1e-12),
                make_row("verify", "radial:numeric_divergence", "h=1e-3", np.max(np.abs(num)), 0.0,
                         np.max(np.abs(num)), 1e-8)]

    def sphere():
        wave = cf.standing_wave(_profile, 1.0, 1.0, 64)
        p = cf.FluctuatingSphereParams([0.3, 0.4, 0.5], [0.7, -0.4, 1.1], A=1.0, B=0.5)
        r = np.max(np.abs(cf.fluctuating_sphere_residual(p, 0.6)))
        pw = cf.FluctuatingSphereParams([0.3, 0.4, 0.5], [0.7, -0.4, 1.1], A=1.0, B=0.5, wave=wave)
        # the m=64 wave modes need a finer time step than the smooth families
        rw = np.max(np.abs(cf.fluctuating_sphere_residual(pw, 0.6, h=1e-4)))
        return [make_row("verify", "fluctuating_sphere:ode", "h=1e-3", r, 0.0, r, 1e-10),
                make_row("verify", "fluctuating_sphere:with_wave", "h=1e-4", rw, 0.0, rw, 1e-10)]

    def waves():
        wave = cf.standing_wave(_profile, 1.0, 1.0, 64)
        h = 1e-3
        xi = np.linspace(0.1, 0.9, 17)
        t = 0.37
        d2t = sum(w * wave(xi, t + o * h) for o, w in cf.D2) / h**2
        d2x = sum(w * wave(xi + o * h, t) for o, w in cf.D2) / h**2
        res = float(np.max(np.abs(d2t - d2x)))
        fn = lambda P, s: cf.position_wave_field(wave, [0.1, -0.2, 0.3], [0.6, 0.0, 0.8], P, s)
        R = cf.sample_spacetime(fn, np.array([0.4, 0.5, 0.6]), t, 1e-3, 1e-3, n=7, nt=7)
        pw = float(np.max(np.abs(cf.position_wave_residual(R, 1e-3, 1e-3, 1.0))))
        Rf, Lf = cf.plane_wave_pair(1.0)
        c = np.array([0.2, 0.1, -0.3])
        Rs = cf.sample_spacetime(Rf, c, 0.4, 1e-3, 1e-3)
        Ls = cf.sample_spacetime(Lf, c, 0.4, 1e-3, 1e-3)
        r1, r2 = cf.rotor_pair_residual(Rs, Ls, 1e-3, 1e-3, 1.0)
        r1, r2 = float(np.max(np.abs(r1))), float(np.max(np.abs(r2)))
        return [make_row("verify", "standing_wave:pde", "h=1e-3", res, 0.0, res, 1e-6),
                make_row("verify", "standing_wave:tail_bound", "m=64", wave.tail_bound, 0.0, wave.tail_bound, 1e-3),
                make_row("verify", "position_wave:pde", "h=1e-3", pw, 0.0, pw, 1e-6),
                make_row("verify", "rotor_pair:first", "h=1e-3", r1, 0.0, r1, 1e-10),
                make_row("verify", "rotor_pair:second", "h=1e-3", r2, 0.0, r2, 1e-10)]

    return run_cases([radial, sphere, waves])


# -- laws ------------------------------------------------------------------

def kelvin_scaling(n=32, radius=1.0, Lambda=0.05, v_m=1.0, kT=1.0, order=4):
    """Static Kelvin closure on spheres of radius ``R`` and ``2R``.

    Returns ``(ln_ratio(R), ln_ratio(2R))`` node fields with curvature measured
    so that spheres have positive mean curvature.
    """
    chart = ChartGrid.latlong(n, n, order=order)
    out = []
    for r in (radius, 2 * radius):
        g = geometry_of(Sphere(r), chart, curvature_sign=-1)
        out.append(laws.static_closure("kelvin", g, Lambda, kT=kT, v_m=v_m))
    return out


def _read_environment(path, n_nodes):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            recs = list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read environment table {path}: {exc}") from None
    need = {"node", "p_v", "p_s", "T"}
    if not recs or not need <= set(recs[0]):
        raise ConfigError("environment table needs columns node, p_v, p_s, T")
    if len(recs) != n_nodes:
        raise ConfigError(f"environment table has {len(recs)} rows, chart has {n_nodes} nodes")
    recs.sort(key=lambda r: int(r["node"]))
    return {k: np.array([float(r[k]) for r in recs]) for k in ("p_v", "p_s", "T")}


def laws_suite(cfg):
    n = cfg.get("resolutions", [32])[0]
    seed = cfg.get("seed", 0)
    n_fields = cfg.get("n_fields", 100)
    v_min = cfg.get("v_min", 0.5)
    semantics = cfg.get("semantics", "componentwise")
    kT = cfg.get("kT", 1.0)
    v_m = cfg.get("v_m", 1.0)
    chart = ChartGrid.torus(n, n)
    geom = geometry_of(make_shape("torus", **SHAPE_DEFAULTS["torus"]), chart)
    res = _res(n)

    def ensemble():
        inputs = laws.random_ensemble(chart, n_fields, seed, v_min=v_min)
        rep = laws.boundedness_certificate(inputs, geom, semantics)
        return [make_row("laws", f"ensemble:{semantics}:residual", res, rep.max_residual, 0.0, rep.max_residual, 1e-10),
                make_row("laws", f"ensemble:{semantics}:bound", res, rep.max_B, rep.bound,
                         max(0.0, rep.max_B - rep.bound), 0.0)]

    def kelvin():
        Lam = 0.05
        a, b = kelvin_scaling(n, 1.0, Lam, v_m, kT)
        rows = [make_row("laws", "kelvin:halving", _res(n), float(np.mean(b)), float(np.mean(a)) / 2,
                         float(np.max(np.abs(a / 2 - b))), 0.0)]
        classical = 2 * Lam * v_m / (kT * 1.0)
        rows.append(make_row("laws", "kelvin:classical", _res(n), float(np.mean(a)), classical,
                             abs(float(np.mean(a)) / classical - 1), 1e-4))
        radii = cfg.get("radii")
        path = cfg.get("static_table")
        if path:
            radii = radii or [0.5, 1.0, 2.0, 4.0]
            ch = ChartGrid.latlong(n, n)
            recs = []
            for r in radii:
                g = geometry_of(Sphere(r), ch, curvature_sign=-1)
                recs.append((r, float(np.mean(laws.static_closure("kelvin", g, Lam, kT=kT, v_m=v_m))),
                             2 * Lam * v_m / (kT * r)))
            write_text(path, table_csv(("R", "ln_ratio", "classical"), recs))
        return rows

    def environment():
        path = cfg.get("environment")
        if not path:
            return []
        env = _read_environment(path, chart.n_u * chart.n_v)
        rng = XorShift64Star(seed)
        V = laws.random_tangent_field(rng, chart, v_min)
        shape = chart.shape
        inp = laws.LawInput("kelvin", V, np.ones(shape), kT=kT * env["T"].reshape(shape), v_m=v_m,
                            p_v=env["p_v"].reshape(shape), p_s=env["p_s"].reshape(shape), v_min=v_min)
        out = laws.solve_curvature_law(inp, geom, semantics)
        dest = cfg.get("fields")
        if dest:
            U, Vc = chart.coords()
            B = out.B
            recs = zip(range(U.size), U.ravel(), Vc.ravel(), B[..., 0, 0].ravel(), B[..., 0, 1].ravel(),
                       B[..., 1, 1].ravel(), out.Q.ravel(), out.tau.ravel())
            write_text(dest, table_csv(("node", "u", "v", "B_uu", "B_uv", "B_vv", "Q", "tau"), list(recs)))
        return [make_row("laws", "environment:residual", res, out.residual, 0.0, out.residual, 1e-10)]

    return run_cases([ensemble, kelvin, environment])


# -- ns ----------------------------------------------------------------------

def _flow_grid_size(name, n):
    if name == "rest":
        return n
    if name == "shear":
        return (8, 32 * n, 8)
    return (n, n, 8)


def ns_suite(cfg):
    flows = cfg.get("flows", list(ns.FLOWS))
    res = cfg.get("resolutions", [32, 64])
    order = cfg.get("order", 4)
    tol = cfg.get("tolerance", 1e-2)
    order_min = cfg.get("order_min", 2.0)
    seed = cfg.get("seed", 0)
    params = cfg.params_for("flow")

    def tolerance(name, case):
        if name == "rest":
            return 0.0
        if name == "rigid_rotation":
            return min(case.grid.spacing) ** 2
        if name == "shear":
            return 1e-10
        return tol

    def case(name):
        rows, errs, sizes = [], [], []
        for n in res:
            size = _flow_grid_size(name, n)
            c = ns.make_flow(name, n=size, order=order, **params)
            e = c.error()
            errs.append(e)
            sizes.append(n)
            label = "x".join(str(k) for k in np.broadcast_to(size, (3,)))
            rows.append(make_row("ns", f"{name}:residual", label, e, 0.0, e, tolerance(name, c)))
        if name not in ("rest", "shear"):
            rows.append(_order_row("ns", name, sizes, errs, order_min))
        return rows

    def rigid():
        g = ns.BoxGrid(12, (-1.0,) * 3, (1.0,) * 3, (False,) * 3, order)
        worst = 0.0
        for a, om, V in ns.random_rigid_motions(g, cfg.get("rigid_count", 20), seed):
            s = ns.viscous_stress(ns.AmbientFlow(g, V, 0.0, 1.0, 0.7, 0.3))
            worst = max(worst, float(np.max(np.abs(s))))
        # dyadic data makes the shifted velocity exactly representable
        gd = ns.BoxGrid(9, (-1.0,) * 3, (1.0,) * 3, (False,) * 3, order)
        Vd = ns.rigid_motion(gd, [0.5, -0.25, 1.0], [0.125, 0.75, -1.5])
        s1 = ns.viscous_stress(ns.AmbientFlow(gd, Vd, 0.0, 1.0, 0.7, 0.3))
        s2 = ns.viscous_stress(ns.AmbientFlow(gd, Vd + np.array([3.0, -2.5, 0.75]), 0.0, 1.0, 0.7, 0.3))
        gal = float(np.max(np.abs(s1 - s2)))
        return [make_row("ns", "rigid_motions:stress", "12x12x12", worst, 0.0, worst, 1e-12),
                make_row("ns", "galilean_shift:stress", "9x9x9", gal, 0.0, gal, 0.0)]

    return run_cases([lambda f=f: case(f) for f in flows] + [rigid])


SUITE_FUNCS = {
    "geometry": geometry_suite,
    "transport": transport_suite,
    "evolve": evolve_suite,
    "verify": verify_suite,
    "laws": laws_suite,
    "ns": ns_suite,
}


def run_suite(cfg):
    """Rows for ``cfg.suite``; ``all`` runs every suite with the shared keys."""
    if cfg.suite == "all":
        rows = []
        for name, fn in SUITE_FUNCS.items():
            sub = type(cfg)(name, {k: v for k, v in cfg.values.items()
                                   if k in ("seed", "order_min")}, dict(cfg.params))
            rows.extend(fn(sub))
        return rows
    return SUITE_FUNCS[cfg.suite](cfg)
