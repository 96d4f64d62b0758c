"""Static differential geometry of a sampled surface.

Array layout: every per-node quantity has the chart grid as its two leading
axes. Chart indices follow, then ambient (x, y, z) indices. So ``S[..., i, :]``
is the base vector ``S_i``, ``metric[..., i, j]`` is ``S_ij`` and
``Gamma[..., k, i, j]`` is ``Gamma^k_ij``.

The unit normal is ``S_1 x S_2`` normalised, which is outward for the catalog
charts. A sphere of radius r then has ``H = -2/r`` and ``K = 1/r**2``. Passing
``curvature_sign=-1`` flips the normal (and with it ``B_ij`` and ``H``).
"""

import string
from dataclasses import dataclass

import numpy as np

from .chart import ChartGrid
from .errors import ChartError, DegenerateChartError

DEGENERACY_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class GeometryState:
    chart: ChartGrid
    R: np.ndarray
    S: np.ndarray
    metric: np.ndarray
    inv_metric: np.ndarray
    sqrtS: np.ndarray
    N: np.ndarray
    Gamma: np.ndarray
    B: np.ndarray
    Bmix: np.ndarray
    H: np.ndarray
    K: np.ndarray
    closed: bool = True
    curvature_sign: int = 1

    @property
    def mask(self):
        return self.chart.mask

    @property
    def B_sq(self):
        """Full contraction ``B_ij B^ij``."""
        return np.einsum("...ij,...ji->...", self.Bmix, self.Bmix)

    @property
    def area(self):
        return integrate_surface(np.ones(self.chart.shape), self)

    @property
    def volume(self):
        return integrate_enclosed_volume(self)


# -- building blocks --------------------------------------------------------

def covariant_basis(R, chart):
    """``S_i = d R / d u^i``; shape ``(n_u, n_v, 2, 3)``."""
    return chart.gradient(R)


def second_derivatives(R, chart):
    """``d_i d_j R`` with dedicated second-derivative stencils on the diagonal."""
    Ruu = chart.diff(R, 0, deriv=2)
    Rvv = chart.diff(R, 1, deriv=2)
    Ruv = chart.diff(chart.diff(R, 1), 0)
    return np.stack([np.stack([Ruu, Ruv], axis=2), np.stack([Ruv, Rvv], axis=2)], axis=2)


def _inverse2(m):
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    inv = np.empty_like(m)
    inv[..., 0, 0] = m[..., 1, 1]
    inv[..., 1, 1] = m[..., 0, 0]
    inv[..., 0, 1] = -m[..., 0, 1]
    inv[..., 1, 0] = -m[..., 1, 0]
    # masked nodes may be singular; they are excluded by the caller
    with np.errstate(divide="ignore", invalid="ignore"):
        return inv / det[..., None, None], det


def _check_degenerate(det, mask):
    d = det[mask]
    if d.size == 0:
        raise ChartError("chart has no valid nodes")
    scale = np.mean(np.abs(d))
    bad = ~(d > DEGENERACY_RTOL * scale)
    if bad.any():
        raise DegenerateChartError(f"degenerate metric at {int(bad.sum())} unmasked node(s)")


def first_fundamental(S, mask=None):
    """Metric ``S_ij``, its inverse ``S^ij`` and area element ``sqrt(S)``."""
    metric = np.einsum("...ia,...ja->...ij", S, S)
    metric = 0.5 * (metric + np.swapaxes(metric, -1, -2))
    if mask is None:
        mask = np.ones(metric.shape[:-2], bool)
    det = metric[..., 0, 0] * metric[..., 1, 1] - metric[..., 0, 1] * metric[..., 1, 0]
    _check_degenerate(det, mask)
    inv, det = _inverse2(metric)
    with np.errstate(invalid="ignore"):
        return metric, inv, np.sqrt(det)


def unit_normal(S, mask=None):
    n = np.cross(S[..., 0, :], S[..., 1, :])
    norm = np.linalg.norm(n, axis=-1)
    if mask is None:
        mask = np.ones(norm.shape, bool)
    _check_degenerate(norm**2, mask)
    return n / norm[..., None]


def christoffel(metric, chart, inv_metric=None, dmetric=None):
    """``Gamma^k_ij`` from metric derivatives; ``dmetric[..., k, i, j] = d_k S_ij``."""
    if inv_metric is None:
        inv_metric, _ = _inverse2(metric)
    if dmetric is None:
        dmetric = chart.gradient(metric, parity=chart.parity(2))
    # first kind: Gamma_{m,ij}
    first = 0.5 * (np.einsum("...imj->...mij", dmetric) + np.einsum("...jmi->...mij", dmetric) - dmetric)
    gamma = np.einsum("...km,...mij->...kij", inv_metric, first)
    return 0.5 * (gamma + np.swapaxes(gamma, -1, -2))


def curvature(S, N, Gamma, chart, inv_metric=None, d2R=None):
    """Curvature tensor ``B_ij``, mixed ``B^i_j``, ``H`` and ``K``.

    ``d2R[..., i, j, :]`` holds ``d_i S_j``; computed from ``S`` when omitted.
    """
    if d2R is None:
        d2R = chart.gradient(S, parity=chart.parity(1, 1))
    if inv_metric is None:
        inv_metric, _ = _inverse2(np.einsum("...ia,...ja->...ij", S, S))
    hess = d2R - np.einsum("...kij,...ka->...ija", Gamma, S)
    B = np.einsum("...ija,...a->...ij", hess, N)
    B = 0.5 * (B + np.swapaxes(B, -1, -2))
    Bmix = np.einsum("...ik,...kj->...ij", inv_metric, B)
    H = Bmix[..., 0, 0] + Bmix[..., 1, 1]
    K = Bmix[..., 0, 0] * Bmix[..., 1, 1] - Bmix[..., 0, 1] * Bmix[..., 1, 0]
    return B, Bmix, H, K


def build_geometry(chart, R, *, closed=None, curvature_sign=1):
    """All static geometry of the sampled surface ``R`` on ``chart``."""
    R = np.asarray(R, dtype=float)
    if R.shape != chart.shape + (3,):
        raise ChartError("positions do not match the chart")
    if curvature_sign not in (1, -1):
        raise ValueError("curvature_sign must be +1 or -1")
    mask = chart.mask
    S = covariant_basis(R, chart)
    d2R = second_derivatives(R, chart)
    metric, inv, sqrtS = first_fundamental(S, mask)
    N = curvature_sign * unit_normal(S, mask)
    dmetric = np.einsum("...kia,...ja->...kij", d2R, S)
    dmetric = dmetric + np.swapaxes(dmetric, -1, -2)
    Gamma = christoffel(metric, chart, inv, dmetric)
    B, Bmix, H, K = curvature(S, N, Gamma, chart, inv, d2R)
    if closed is None:
        closed = chart.is_closed
    return GeometryState(chart, R, S, metric, inv, sqrtS, N, Gamma, B, Bmix, H, K,
                         bool(closed), curvature_sign)


def geometry_of(shape, chart, curvature_sign=1):
    """Embed a catalog shape and build its geometry."""
    from .shapes import embed

    R = embed(chart, shape)
    closed = shape.topology in ("sphere", "torus")
    return build_geometry(chart, R, closed=closed, curvature_sign=curvature_sign)


# -- tensor calculus --------------------------------------------------------

def covariant_derivative(T, geom, signature=""):
    """Surface covariant derivative of a chart tensor field.

    ``signature`` lists the index positions of ``T`` after the two grid axes,
    ``'u'`` for contravariant and ``'d'`` for covariant, e.g. ``"ud"`` for
    ``T^a_b``. The new derivative index is placed first:
    ``out[..., k, a, b] = nabla_k T^a_b``.
    """
    rank = len(signature)
    if rank > 2:
        raise ValueError("covariant derivatives support tensors up to rank 2")
    if any(c not in "ud" for c in signature):
        raise ValueError("signature letters must be 'u' or 'd'")
    T = np.asarray(T, dtype=float)
    chart = geom.chart
    if T.shape != chart.shape + (2,) * rank:
        raise ValueError("tensor shape does not match its signature")
    out = chart.gradient(T, parity=chart.parity(rank))
    G = geom.Gamma
    letters = string.ascii_lowercase[:rank]
    for p, kind in enumerate(signature):
        src = list(letters)
        dst = "k" + letters
        if kind == "u":
            # + Gamma^a_{kc} T^{..c..}
            src[p] = "z"
            expr = f"...{letters[p]}kz,...{''.join(src)}->...{dst}"
            out = out + np.einsum(expr, G, T)
        else:
            # - Gamma^c_{k a} T_{..c..}
            src[p] = "z"
            expr = f"...zk{letters[p]},...{''.join(src)}->...{dst}"
            out = out - np.einsum(expr, G, T)
    return out


def surface_gradient(f, geom):
    """``nabla_i f`` for a scalar field."""
    return geom.chart.gradient(f)


def raise_index(v, geom):
    return np.einsum("...ij,...j->...i", geom.inv_metric, v)


def lower_index(v, geom):
    return np.einsum("...ij,...j->...i", geom.metric, v)


def divergence(W, geom):
    """``nabla_i W^i`` for a tangent vector field given by contravariant components."""
    dW = covariant_derivative(W, geom, "u")
    return dW[..., 0, 0] + dW[..., 1, 1]


def laplace_beltrami(f, geom, form="expanded"):
    """Laplace-Beltrami operator ``nabla_i nabla^i f``.

    ``form="expanded"`` evaluates ``S^ij (d_i d_j f - Gamma^k_ij d_k f)`` with
    second-derivative stencils. ``form="divergence"`` evaluates
    ``(1/sqrt S) d_i (sqrt S S^ij d_j f)``; both agree to discretization error.
    """
    f = np.asarray(f, dtype=float)
    chart = geom.chart
    if form == "expanded":
        fu = chart.diff(f, 0)
        fv = chart.diff(f, 1)
        fuu = chart.diff(f, 0, deriv=2)
        fvv = chart.diff(f, 1, deriv=2)
        fuv = chart.diff(fv, 0)
        grad = np.stack([fu, fv], axis=-1)
        hess = np.stack([np.stack([fuu, fuv], -1), np.stack([fuv, fvv], -1)], -2)
        hess = hess - np.einsum("...kij,...k->...ij", geom.Gamma, grad)
        return np.einsum("...ij,...ij->...", geom.inv_metric, hess)
    if form == "divergence":
        grad = chart.gradient(f)
        flux = geom.sqrtS[..., None] * raise_index(grad, geom)
        # sqrt(S) is odd under the pole reflection, so the theta flux is even
        par = -chart.parity(1)
        div = chart.diff(flux[..., 0], 0, parity=par[0]) + chart.diff(flux[..., 1], 1)
        return div / geom.sqrtS
    raise ValueError(f"unknown Laplacian form {form!r}")


# -- integration ------------------------------------------------------------

def integrate_surface(f, geom):
    """``int f dS`` over the valid part of the chart."""
    f = np.asarray(f, dtype=float)
    w = geom.chart.weights * geom.sqrtS
    w = w.reshape(w.shape + (1,) * (f.ndim - 2))
    vals = np.where(geom.chart.mask.reshape(w.shape), f * w, 0.0)
    return np.sum(vals, axis=(0, 1))


def _require_closed(geom):
    if not geom.closed:
        raise ChartError("volume integrals need a closed surface")


def integrate_enclosed_volume(geom):
    """Enclosed volume via ``(1/3) oint R . N dS``."""
    _require_closed(geom)
    return geom.curvature_sign * integrate_surface(np.einsum("...a,...a->...", geom.R, geom.N), geom) / 3.0


def integrate_volume(F, geom, n_radial=24):
    """``int_Omega F dV`` for a callable ``F(points)`` defined on all of space.

    Uses ``div G = F`` with ``G(x) = x int_0^1 s^2 F(s x) ds`` (Gauss-Legendre
    in ``s``) and the divergence theorem on the enclosing surface.
    """
    _require_closed(geom)
    s, ws = np.polynomial.legendre.leggauss(n_radial)
    s = 0.5 * (s + 1)
    ws = 0.5 * ws
    R = geom.R
    inner = np.zeros(R.shape[:2])
    for sk, wk in zip(s, ws):
        inner = inner + wk * sk**2 * np.asarray(F(sk * R), dtype=float)
    flux = inner * np.einsum("...a,...a->...", R, geom.N)
    return geom.curvature_sign * integrate_surface(flux, geom)


def geometry_table(geom):
    """Rows ``(node, u, v, x, y, z, H, K)`` for valid nodes, in chart order."""
    U, V = geom.chart.coords()
    rows = []
    idx = 0
    for i in range(geom.chart.n_u):
        for j in range(geom.chart.n_v):
            if geom.chart.mask[i, j]:
                x, y, z = geom.R[i, j]
                rows.append((idx, U[i, j], V[i, j], x, y, z, geom.H[i, j], geom.K[i, j]))
            idx += 1
    return rows
