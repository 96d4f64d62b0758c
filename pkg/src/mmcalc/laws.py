"""Curvature-tensor laws of the tangent-dominated regime.

All three laws share the form

    B_ab = (Q_base - kappa Lambda B^i_i) W_ab,    W_ab = (D V_a V_b)^-1

with the numerator source

    pressure        Q_base = 2 P + div F                      D = rho        kappa = 1
    kelvin          Q_base = (kT / v_m) ln(p_v / p_s) + div F  D = rho        kappa = 1
    gibbs-thomson   Q_base = gamma_T H_fus + v_m div F         D = rho v_m    kappa = v_m

``W_ab`` is read componentwise, ``1 / (D V_a V_b)``, by default. The
alternative ``semantics="pinv"`` uses the Moore-Penrose inverse of the rank-one
matrix ``D V V^T``, which is ``V_a V_b / (D |V|^4)``. In both cases the trace
``B^i_i = S^ab B_ab = Q tau`` with ``tau = S^ab W_ab`` closes the law:
``Q = Q_base / (1 + kappa Lambda tau)``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ClosureSingularityError, SpeedError
from .rng import XorShift64Star

SOURCES = ("pressure", "kelvin", "gibbs-thomson")
CLOSURE_TOL = 1e-12


def _arr(x):
    return None if x is None else np.asarray(x, dtype=float)


@dataclass(frozen=True, eq=False)
class LawInput:
    source: str
    V_low: np.ndarray          # covariant tangent velocity components V_a
    rho: np.ndarray
    Lambda: np.ndarray = 0.0
    divF: np.ndarray = 0.0
    P: np.ndarray = None
    kT: np.ndarray = None
    v_m: float = None
    p_v: np.ndarray = None
    p_s: np.ndarray = None
    T: np.ndarray = None
    T0: float = None
    H_fus: float = None
    v_min: float = None

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown law source {self.source!r}")
        for name in ("V_low", "rho", "Lambda", "divF", "P", "kT", "v_m", "p_v", "p_s", "T", "T0", "H_fus"):
            object.__setattr__(self, name, _arr(getattr(self, name)))
        if np.any(self.rho <= 0):
            raise ValueError("rho must be positive")
        if np.any(self.Lambda < 0):
            raise ValueError("Lambda must be non-negative")
        if self.source == "pressure" and self.P is None:
            raise ValueError("pressure law needs P")
        if self.source == "kelvin":
            if self.kT is None or self.v_m is None or self.p_v is None or self.p_s is None:
                raise ValueError("kelvin law needs kT, v_m, p_v, p_s")
            if np.any(self.p_v <= 0) or np.any(self.p_s <= 0):
                raise ValueError("pressures must be positive")
        if self.source == "gibbs-thomson":
            if self.T is None or self.T0 is None or self.H_fus is None or self.v_m is None:
                raise ValueError("gibbs-thomson law needs T, T0, H_fus, v_m")
            if np.any(self.T <= 0) or np.any(self.T0 <= 0):
                raise ValueError("temperatures must be positive")
        if self.v_m is not None and np.any(self.v_m <= 0):
            raise ValueError("molar volume must be positive")
        if self.v_min is None:
            speed = np.sqrt(np.mean(np.sum(self.V_low**2, axis=-1)))
            object.__setattr__(self, "v_min", 1e-3 * float(speed))

    @property
    def q_base(self):
        if self.source == "pressure":
            return 2 * self.P + self.divF
        if self.source == "kelvin":
            return self.kT / self.v_m * np.log(self.p_v / self.p_s) + self.divF
        return gibbs_thomson_gamma(self.T, self.T0) * self.H_fus + self.v_m * self.divF

    @property
    def density(self):
        return self.rho * self.v_m if self.source == "gibbs-thomson" else self.rho

    @property
    def kappa(self):
        return self.v_m if self.source == "gibbs-thomson" else 1.0


def gibbs_thomson_gamma(T, T0):
    return 1.0 - np.asarray(T, float) / np.asarray(T0, float)


@dataclass(frozen=True, eq=False)
class LawResult:
    B: np.ndarray
    Q: np.ndarray
    Q_base: np.ndarray
    tau: np.ndarray
    trace: np.ndarray
    residual: float          # max relative back-substitution residual
    closure_residual: float  # max relative mismatch of Q = Q_base - kappa Lambda trace
    semantics: str


def _inv_metric(geom):
    return geom.inv_metric if hasattr(geom, "inv_metric") else np.asarray(geom, dtype=float)


def _rel(err, scale):
    scale = np.maximum(np.abs(scale), np.finfo(float).tiny)
    return float(np.max(np.abs(err) / scale)) if np.size(err) else 0.0


def solve_curvature_law(inp, geom, semantics="componentwise"):
    """Curvature tensor of the chosen law on every node, with closure report."""
    inv = _inv_metric(geom)
    V = inp.V_low
    if np.any(np.abs(V) < inp.v_min):
        raise SpeedError(f"tangent speed component below v_min={inp.v_min:g}")
    D = np.broadcast_to(inp.density, V.shape[:-1])[..., None, None]
    VV = V[..., :, None] * V[..., None, :]
    if semantics == "componentwise":
        W = 1.0 / (D * VV)
    elif semantics == "pinv":
        W = VV / (D * np.sum(V**2, axis=-1)[..., None, None] ** 2)
    else:
        raise ValueError(f"unknown semantics {semantics!r}")
    tau = np.einsum("...ab,...ab->...", np.broadcast_to(inv, W.shape), W)
    denom = 1.0 + inp.kappa * inp.Lambda * tau
    if np.any(np.abs(denom) < CLOSURE_TOL):
        raise ClosureSingularityError("1 + kappa Lambda tau vanishes")
    q_base = np.broadcast_to(inp.q_base, tau.shape)
    Q = q_base / denom
    B = Q[..., None, None] * W
    trace = np.einsum("...ab,...ab->...", np.broadcast_to(inv, B.shape), B)
    M = D * VV
    if semantics == "componentwise":
        back = B * M - Q[..., None, None]
        residual = _rel(back, Q[..., None, None])
    else:
        back = np.einsum("...ab,...bc,...cd->...ad", M, B, M) - Q[..., None, None] * M
        residual = _rel(back, Q[..., None, None] * np.max(np.abs(M), axis=(-1, -2), keepdims=True))
    closure = Q - (q_base - inp.kappa * inp.Lambda * trace)
    closure_residual = _rel(closure, np.maximum(np.abs(q_base), np.abs(Q)))
    return LawResult(B, Q, q_base, tau, trace, residual, closure_residual, semantics)


def static_closure(law, H, Lambda, divF=0.0, kT=None, v_m=None, H_fus=None):
    """Static limit ``Q_base = kappa Lambda B^i_i`` solved for the free scalar.

    ``H`` is the mean curvature (array or a geometry state) in whatever sign
    convention the caller uses; build the geometry with ``curvature_sign=-1``
    for the convention in which spheres have positive mean curvature.

    kelvin         ln(p_v/p_s) = (v_m / kT) (Lambda H - div F)
    pressure       P = (Lambda H - div F) / 2
    gibbs-thomson  gamma_T = v_m (Lambda H - div F) / H_fus
    """
    H = np.asarray(getattr(H, "H", H), dtype=float)
    drive = np.asarray(Lambda, float) * H - np.asarray(divF, float)
    if law == "kelvin":
        if kT is None or v_m is None:
            raise ValueError("kelvin closure needs kT and v_m")
        return v_m / kT * drive
    if law == "pressure":
        return drive / 2
    if law == "gibbs-thomson":
        if v_m is None or H_fus is None:
            raise ValueError("gibbs-thomson closure needs v_m and H_fus")
        if H_fus == 0:
            raise ZeroDivisionError("fusion enthalpy must be non-zero")
        return v_m * drive / H_fus
    raise ValueError(f"unknown law {law!r}")


@dataclass(frozen=True)
class BoundReport:
    n_fields: int
    max_B: float
    bound: float
    ratio: float
    max_residual: float
    passed: bool


def boundedness_certificate(inputs, geom, semantics="componentwise"):
    """Check ``max ||B||_inf <= max|Q| / (D_min v_min^2)`` over an ensemble."""
    inputs = list(inputs)
    if not inputs:
        raise ValueError("empty ensemble")
    max_B = 0.0
    max_Q = 0.0
    d_min = np.inf
    v_min = np.inf
    max_res = 0.0
    for inp in inputs:
        res = solve_curvature_law(inp, geom, semantics)
        max_B = max(max_B, float(np.max(np.abs(res.B))))
        max_Q = max(max_Q, float(np.max(np.abs(res.Q))))
        d_min = min(d_min, float(np.min(inp.density)))
        v_min = min(v_min, float(inp.v_min))
        max_res = max(max_res, res.residual)
    bound = max_Q / (d_min * v_min**2)
    ratio = max_B / bound if bound > 0 else 0.0
    return BoundReport(len(inputs), max_B, bound, ratio, max_res, bool(max_B <= bound))


def random_tangent_field(rng, chart, v_min, amplitude=1.0, max_wavenumber=3):
    """Smooth covariant field with every component satisfying ``|V_a| >= v_min``.

    ``V_a = s_a (v_min + A (1 + sin(k1 u + p1) cos(k2 v + p2)) / 2)`` with random
    sign ``s_a``, integer wavenumbers and phases drawn from ``rng``.
    """
    U, V = chart.coords()
    comps = []
    for _ in range(2):
        sign = rng.choice_sign()
        k1 = 1 + int(rng.uniform() * max_wavenumber)
        k2 = 1 + int(rng.uniform() * max_wavenumber)
        p1, p2 = rng.uniform(0, 2 * np.pi), rng.uniform(0, 2 * np.pi)
        amp = amplitude * rng.uniform(0.1, 1.0)
        wave = 0.5 * (1 + np.sin(k1 * U + p1) * np.cos(k2 * V + p2))
        comps.append(sign * (v_min + amp * wave))
    return np.stack(comps, axis=-1)


def random_ensemble(chart, n_fields, seed, *, v_min=0.5, rho=1.0, q_max=3.0, Lambda=0.0,
                    source="pressure"):
    """``n_fields`` pressure-law inputs with smooth random speeds and numerators.

    ``|Q_base| <= q_max`` everywhere; ``P`` is chosen so that ``2 P`` is a
    smooth random field with that bound and ``div F = 0``.
    """
    rng = XorShift64Star(seed)
    U, V = chart.coords()
    out = []
    for _ in range(n_fields):
        Vl = random_tangent_field(rng, chart, v_min)
        k = 1 + int(rng.uniform() * 3)
        ph = rng.uniform(0, 2 * np.pi)
        q = q_max * rng.uniform(-1, 1) * np.cos(k * U + ph) * np.cos(V - ph)
        lam = Lambda * rng.uniform() if Lambda else 0.0
        out.append(LawInput(source, Vl, np.full(chart.shape, rho), Lambda=lam, P=q / 2, v_min=v_min))
    return out
