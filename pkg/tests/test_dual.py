import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize_scalar

from optbankrupt import DomainError, consumption_leisure, derive, u_tilde
from optbankrupt.dual import U_tilde, u_tilde_deriv, utility


def numeric_sup(y, p):
    """Direct maximisation of u(c, l) - (c + w l) y over c > 0, 0 < l <= L."""
    def best_c(l):
        f = lambda s: -(float(utility(math.exp(s), l, p)) - (math.exp(s) + p.w * l) * y)  # noqa: E731
        res = minimize_scalar(f, bounds=(-20, 10), method="bounded", options={"xatol": 1e-12})
        return res.fun

    res = minimize_scalar(best_c, bounds=(1e-6, p.L), method="bounded", options={"xatol": 1e-12})
    return -min(res.fun, best_c(p.L))


@pytest.mark.parametrize("y", [0.05, 0.2, 0.328, 0.5, 1.3, 3.0])
def test_u_tilde_matches_numeric_sup(base_params, y):
    dc = derive(base_params)
    assert u_tilde(y, dc).u_tilde == pytest.approx(numeric_sup(y, base_params), rel=1e-7)


def test_branch_labels(base_params):
    dc = derive(base_params)
    assert u_tilde(0.1, dc).branch == "below_kink"
    assert u_tilde(dc.y_tilde, dc).branch == "at_or_above_kink"
    assert u_tilde(0.1, dc).l_hat == base_params.L


def test_euler_condition_unconstrained(base_params):
    p = base_params
    dc = derive(p)
    for z in np.geomspace(dc.y_tilde, 50 * dc.y_tilde, 25):
        c, l = consumption_leisure(z, dc)
        assert c ** (p.delta * (1 - p.k) - 1) * l ** ((1 - p.delta) * (1 - p.k)) == pytest.approx(z, rel=1e-12)


def test_consumption_exponent_below_kink(base_params):
    p = base_params
    dc = derive(p)
    e = 1 / (p.delta * (1 - p.k) - 1)
    z1, z2 = 0.05, 0.1
    c1, _ = consumption_leisure(z1, dc)
    c2, _ = consumption_leisure(z2, dc)
    assert math.log(c2 / c1) / math.log(z2 / z1) == pytest.approx(e, rel=1e-12)


def test_envelope(base_params):
    # u~'(y) = -(c + w l) at the maximiser
    p = base_params
    dc = derive(p)
    for y in (0.07, 0.3, 0.9, 4.0):
        c, l = consumption_leisure(y, dc)
        assert u_tilde_deriv(y, dc, 1) == pytest.approx(-(c + p.w * l), rel=1e-12)


def test_continuity_at_kink(base_params):
    dc = derive(base_params)
    y = dc.y_tilde
    for m in (0, 1):
        lo = u_tilde_deriv(y * (1 - 1e-12), dc, m)
        hi = u_tilde_deriv(y, dc, m)
        assert lo == pytest.approx(hi, rel=1e-9)


def test_array_and_scalar_agree(base_params):
    dc = derive(base_params)
    ys = np.geomspace(0.01, 10, 50)
    arr = u_tilde_deriv(ys, dc, 1)
    assert np.allclose(arr, [u_tilde_deriv(float(y), dc, 1) for y in ys], rtol=1e-14)


def test_domain(base_params):
    dc = derive(base_params)
    with pytest.raises(DomainError):
        u_tilde(0.0, dc)
    with pytest.raises(DomainError):
        consumption_leisure(-1.0, dc)


def test_U_tilde_definition(base_sol):
    p = base_sol.params
    pb = base_sol.pb
    for z in (0.05, 0.2, 1.0, 2.0):
        U, U1, U2 = U_tilde(z, pb)
        assert U == pytest.approx(pb.v(z / p.alpha) - p.F * z, rel=1e-13)
        assert U1 == pytest.approx(pb.v(z / p.alpha, 1) / p.alpha - p.F, rel=1e-13)
        assert U2 == pytest.approx(pb.v(z / p.alpha, 2) / p.alpha ** 2, rel=1e-13)


@settings(max_examples=300, deadline=None)
@given(c=st.floats(1e-3, 50), l=st.floats(1e-3, 0.8), y=st.floats(1e-3, 20))
def test_fenchel_inequality(base_params, c, l, y):
    dc = derive(base_params)
    val = float(utility(c, l, base_params)) - (c + base_params.w * l) * y
    assert val <= u_tilde(y, dc).u_tilde + 1e-9 * (1 + abs(val))


@settings(max_examples=200, deadline=None)
@given(y1=st.floats(1e-3, 20), y2=st.floats(1e-3, 20))
def test_u_tilde_convex_decreasing(base_params, y1, y2):
    dc = derive(base_params)
    lo, hi = min(y1, y2), max(y1, y2)
    d_lo, d_hi = u_tilde_deriv(lo, dc, 1), u_tilde_deriv(hi, dc, 1)
    assert d_lo < 0 and d_hi < 0
    assert d_lo <= d_hi + 1e-12
