import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmcalc import fd
from mmcalc.errors import StencilError


@pytest.mark.parametrize("order", fd.SUPPORTED_ORDERS)
@pytest.mark.parametrize("deriv", [1, 2])
def test_centered_stencils_have_stated_order(order, deriv):
    errs = []
    for n in (32, 64):
        x = 2 * np.pi * np.arange(n) / n
        num = fd.derivative(np.sin(x), 0, x[1], deriv=deriv, order=order)
        exact = np.cos(x) if deriv == 1 else -np.sin(x)
        errs.append(np.max(np.abs(num - exact)))
    assert np.log2(errs[0] / errs[1]) == pytest.approx(order, abs=0.2)


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3), st.sampled_from([1, 2]))
def test_bounded_exact_on_quadratics(coef, deriv):
    # one-sided end stencils are second order, hence exact on quadratics
    x = np.linspace(-1, 1, 11)
    a, b, c = coef
    f = a + b * x + c * x**2
    exact = b + 2 * c * x if deriv == 1 else np.full_like(x, 2 * c)
    num = fd.derivative(f, 0, x[1] - x[0], deriv=deriv, kind="bounded")
    assert np.max(np.abs(num - exact)) < 1e-11


@given(st.lists(st.integers(-64, 64), min_size=12, max_size=12), st.integers(-512, 512))
def test_constant_offset_is_bitwise_invisible(vals, shift):
    # dyadic data: f + c is exact, so the difference-form stencil sees the same numbers
    f = np.array(vals, dtype=float) / 64
    c = shift / 8
    for kind in ("periodic", "bounded"):
        a = fd.derivative(f, 0, 0.25, kind=kind)
        b = fd.derivative(f + c, 0, 0.25, kind=kind)
        assert np.array_equal(a, b)


def test_masked_nodes_fall_back_and_return_nan():
    x = np.linspace(0, 1, 12)
    valid = np.ones(12, bool)
    valid[:2] = False
    d = fd.derivative(x**2, 0, x[1], kind="bounded", valid=valid)
    assert np.all(np.isnan(d[:2]))
    assert np.allclose(d[2:], 2 * x[2:], atol=1e-12)


def test_too_few_valid_nodes_raises():
    valid = np.zeros(10, bool)
    valid[4:6] = True
    with pytest.raises(StencilError):
        fd.derivative(np.arange(10.0), 0, 1.0, kind="bounded", valid=valid)


def test_bad_arguments():
    with pytest.raises(ValueError):
        fd.derivative(np.zeros(10), 0, 1.0, order=3)
    with pytest.raises(ValueError):
        fd.derivative(np.zeros(10), 0, 1.0, deriv=3)
    with pytest.raises(ValueError):
        fd.derivative(np.zeros(10), 0, 1.0, kind="spiral")
