import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optbankrupt import (InvalidParams, ModelParams, MultipleCasesAdmissible, NoCaseAdmissible,
                         audit, solve_model)
from optbankrupt.primal import (CASES, REGIME_REFLECT, REGIME_STOP, HFunction, audit_passes,
                                find_h_root, h_eval)

from oracles import shoot


def test_baseline_case(base_sol):
    s = base_sol
    assert s.case_tag == "Case 2" and s.regime == REGIME_STOP
    assert s.coeffs["B2"] == pytest.approx(5.3104279, rel=1e-7)
    assert s.z_bar == pytest.approx(0.1591404, rel=1e-6)
    assert s.z_hat == pytest.approx(2.6125768, rel=1e-7)


def test_smooth_fit(base_sol):
    s = base_sol
    for m in (0, 1):
        assert s.value(s.z_bar, m) == pytest.approx(s.U(s.z_bar, m), abs=1e-12)


def test_liquidity_boundary_equation(base_sol):
    s = base_sol
    assert s.U(s.z_hat, 1) == pytest.approx(-s.floor, abs=1e-12)


def test_shooting_from_boundary(base_sol):
    s = base_sol
    zb = s.z_bar
    zs, v, dv = shoot(s.dc, s.params.d, zb, s.U(zb), s.U(zb, 1), zb / 2)
    assert np.allclose(v, s.v(zs), rtol=1e-8, atol=1e-10)
    assert np.allclose(dv, s.v(zs, 1), rtol=1e-7, atol=1e-9)


def test_value_dominates_stopping(base_sol):
    s = base_sol
    zs = np.geomspace(1e-4, s.z_bar, 500)
    assert np.all(s.v(zs) - s.U(zs) >= -1e-12)


def test_h_root_is_lower_bound(base_sol):
    s = base_sol
    ctx = HFunction(s.params, s.dc, s.pb)
    zh = find_h_root(ctx)
    assert abs(h_eval(zh, ctx)) <= 1e-8
    assert zh <= s.z_bar
    assert zh == pytest.approx(s.z_h)


def test_audit_passes(base_sol):
    rep = audit(base_sol)
    assert all(audit_passes(rep).values()), rep


def test_array_eval(base_sol):
    zs = np.geomspace(1e-3, 5.0, 100)
    assert np.allclose(base_sol.v(zs, 1), [base_sol.v(float(z), 1) for z in zs])


def test_v_beyond_liquidity_is_linear(base_sol):
    s = base_sol
    z = s.z_hat * 1.5
    assert s.v(z, 1) == pytest.approx(-s.floor)
    assert s.v(z, 2) == 0.0


def test_full_leisure_case(full_leisure_sol):
    assert full_leisure_sol.case_tag == "Case 4"
    assert np.isinf(full_leisure_sol.z_hat) or full_leisure_sol.z_hat > 1e6


def test_no_case_instance():
    with pytest.raises(NoCaseAdmissible):
        solve_model(ModelParams(F=2.0, d=0.1))


def test_reflected_instance():
    s = solve_model(ModelParams(F=1.5, d=0.05, x0=5.0))
    assert s.case_tag in ("Case 6", "Case 7") and s.regime == REGIME_REFLECT
    assert s.z_bar >= s.z_hat
    assert s.value(s.z_hat, 1) == pytest.approx(-s.floor, abs=1e-10)
    assert max(abs(v) for v in s.residuals.values()) <= 1e-10


def _perturbed(draw):
    base = ModelParams()
    names = ("delta", "k", "r", "mu", "sigma", "gamma", "d", "w", "F", "alpha")
    return base.with_overrides({n: getattr(base, n) * f for n, f in zip(names, draw)})


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.7, 1.3), min_size=10, max_size=10))
def test_exactly_one_case_near_baseline(draw):
    p = _perturbed(draw)
    try:
        sol = solve_model(p)
    except (NoCaseAdmissible, MultipleCasesAdmissible) as exc:  # pragma: no cover
        pytest.fail(f"{exc} at {p}")
    except InvalidParams:
        return
    assert sol.case_tag in CASES
    assert max(abs(v) for v in sol.residuals.values()) <= 1e-10
