"""Finite-difference stencils on uniform grid lines.

Derivatives are taken along one axis of an n-d array. The caller supplies the
axis layout: ``"periodic"`` (wrap-around), ``"bounded"`` (open ends), or
explicit ghost blocks (used for pole reflection on lat-long charts).

Interior nodes use the centered stencil of the requested order. Nodes that do
not have enough valid neighbours fall back to the widest centered stencil that
fits, and finally to second-order one-sided stencils at the ends of a valid run.
"""

import numpy as np

from .errors import StencilError

# centered stencils: order -> list of (offset, weight)
CENTERED = {
    1: {
        2: [(-1, -0.5), (1, 0.5)],
        4: [(-2, 1 / 12), (-1, -2 / 3), (1, 2 / 3), (2, -1 / 12)],
        6: [(-3, -1 / 60), (-2, 3 / 20), (-1, -3 / 4), (1, 3 / 4), (2, -3 / 20), (3, 1 / 60)],
    },
    2: {
        2: [(-1, 1.0), (0, -2.0), (1, 1.0)],
        4: [(-2, -1 / 12), (-1, 4 / 3), (0, -5 / 2), (1, 4 / 3), (2, -1 / 12)],
        6: [(-3, 1 / 90), (-2, -3 / 20), (-1, 3 / 2), (0, -49 / 18), (1, 3 / 2), (2, -3 / 20), (3, 1 / 90)],
    },
}

# second-order one-sided stencils (forward); backward mirrors offsets
FORWARD = {
    1: [(0, -1.5), (1, 2.0), (2, -0.5)],
    2: [(0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)],
}

SUPPORTED_ORDERS = (2, 4, 6)


def _shift(padded, axis, g, s, n):
    idx = [slice(None)] * padded.ndim
    idx[axis] = slice(g + s, g + s + n)
    return padded[tuple(idx)]


def _apply(padded, axis, g, n, stencil, sign=1):
    # weights sum to zero, so use differences against the base node; this makes
    # the result independent of any exactly representable constant offset
    base = _shift(padded, axis, g, 0, n)
    out = None
    for off, w in stencil:
        if off == 0:
            continue
        term = w * (_shift(padded, axis, g, sign * off, n) - base)
        out = term if out is None else out + term
    return out


def _expand(mask, ndim, axis):
    # broadcast a 1-d or 2-d validity mask against the field
    return mask.reshape(mask.shape + (1,) * (ndim - mask.ndim))


def derivative(f, axis, h, *, deriv=1, order=4, kind="periodic", valid=None,
               ghost_lo=None, ghost_hi=None, valid_lo=None, valid_hi=None):
    """Derivative of ``f`` along ``axis`` with spacing ``h``.

    Parameters
    ----------
    f : ndarray
        Field values; the leading dimensions carry the grid.
    axis : int
        Grid axis to differentiate along.
    deriv : {1, 2}
        Derivative order.
    order : {2, 4, 6}
        Accuracy order of the interior centered stencil.
    kind : {"periodic", "bounded", "ghost"}
        Boundary layout. ``"ghost"`` requires ``ghost_lo``/``ghost_hi`` blocks
        of equal width prepended/appended along ``axis``.
    valid : ndarray of bool, optional
        Node validity over the grid dimensions (``f.shape[:valid.ndim]``).
        Invalid nodes are never used by a stencil and come back as NaN.
    """
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported stencil order {order}")
    if deriv not in (1, 2):
        raise ValueError("only first and second derivatives are supported")
    f = np.asarray(f, dtype=float)
    n = f.shape[axis]
    w = order // 2
    g = max(w, 3)
    scale = h if deriv == 1 else h * h

    if valid is None:
        valid = np.ones(f.shape[: axis + 1], dtype=bool)

    if kind == "periodic":
        take = np.arange(-g, n + g) % n
        padded = np.take(f, take, axis=axis)
        pvalid = np.take(valid, take, axis=axis)
    elif kind == "bounded":
        pad_shape = list(f.shape)
        pad_shape[axis] = g
        nan_block = np.full(pad_shape, np.nan)
        padded = np.concatenate([nan_block, f, nan_block], axis=axis)
        vshape = list(valid.shape)
        vshape[axis] = g
        vblock = np.zeros(vshape, dtype=bool)
        pvalid = np.concatenate([vblock, valid, vblock], axis=axis)
    elif kind == "ghost":
        if ghost_lo is None or ghost_hi is None:
            raise ValueError("ghost layout needs ghost_lo and ghost_hi")
        glo = np.take(ghost_lo, np.arange(ghost_lo.shape[axis] - g, ghost_lo.shape[axis]), axis=axis)
        ghi = np.take(ghost_hi, np.arange(g), axis=axis)
        padded = np.concatenate([glo, f, ghi], axis=axis)
        if valid_lo is None:
            valid_lo = np.ones(valid.shape[:axis] + (ghost_lo.shape[axis],) + valid.shape[axis + 1:], bool)
        if valid_hi is None:
            valid_hi = np.ones(valid.shape[:axis] + (ghost_hi.shape[axis],) + valid.shape[axis + 1:], bool)
        vlo = np.take(valid_lo, np.arange(valid_lo.shape[axis] - g, valid_lo.shape[axis]), axis=axis)
        vhi = np.take(valid_hi, np.arange(g), axis=axis)
        pvalid = np.concatenate([vlo, valid, vhi], axis=axis)
    else:
        raise ValueError(f"unknown axis kind {kind!r}")

    centered = CENTERED[deriv]
    if pvalid.all():
        return _apply(padded, axis, g, n, centered[order]) / scale

    # consecutive valid neighbours on each side, capped at g
    left = np.zeros(valid.shape, dtype=int)
    right = np.zeros(valid.shape, dtype=int)
    run_l = np.ones(valid.shape, dtype=bool)
    run_r = np.ones(valid.shape, dtype=bool)
    for s in range(1, g + 1):
        run_l &= _shift(pvalid, axis, g, -s, n)
        run_r &= _shift(pvalid, axis, g, s, n)
        left += run_l
        right += run_r

    padded = np.where(_expand(pvalid, padded.ndim, axis), padded, np.nan)
    out = np.full(f.shape, np.nan)
    assigned = ~valid
    reach = np.minimum(np.minimum(left, right), w)
    for k in range(w, 0, -1):
        sel = valid & (reach == k)
        if sel.any():
            val = _apply(padded, axis, g, n, centered[2 * k])
            out = np.where(_expand(sel, f.ndim, axis), val, out)
            assigned |= sel
    need = 2 if deriv == 1 else 3
    fwd = valid & ~assigned & (right >= need)
    if fwd.any():
        val = _apply(padded, axis, g, n, FORWARD[deriv])
        out = np.where(_expand(fwd, f.ndim, axis), val, out)
        assigned |= fwd
    bwd = valid & ~assigned & (left >= need)
    if bwd.any():
        stencil = FORWARD[deriv]
        if deriv == 1:
            stencil = [(o, -c) for o, c in stencil]
        val = _apply(padded, axis, g, n, stencil, sign=-1)
        out = np.where(_expand(bwd, f.ndim, axis), val, out)
        assigned |= bwd
    if not assigned.all():
        raise StencilError(
            f"fewer than {need + 1} consecutive valid nodes along axis {axis}")
    return out / scale
