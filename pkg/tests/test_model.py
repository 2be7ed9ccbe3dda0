import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optbankrupt import ConfigError, InvalidParams, derive, load_params, validate
from optbankrupt.model import characteristic_roots, parse_override


def test_baseline_is_valid(base_params):
    assert validate(base_params) == []


def test_derived_constants_baseline(base_params):
    dc = derive(base_params)
    assert dc.theta == pytest.approx(0.25)
    assert dc.A1 == pytest.approx(-1.98830, rel=1e-5)
    assert dc.A2 == pytest.approx(-3.10353, rel=1e-5)
    assert dc.y_tilde == pytest.approx(0.328041, rel=1e-5)
    assert dc.n1 == pytest.approx(-8.1744, rel=1e-5)
    assert dc.n2 == pytest.approx(1.17440, rel=1e-5)


def test_roots_against_polynomial(base_params):
    p = base_params
    h = 0.5 * p.theta ** 2
    expect = np.sort(np.roots([h, p.gamma - p.r - h, -p.gamma]).real)
    assert characteristic_roots(p.theta, p.r, p.gamma) == pytest.approx(tuple(expect), rel=1e-12)


def test_gamma_divisors(base_params):
    p = base_params
    dc = derive(p)
    h = 0.5 * p.theta ** 2
    for beta, g in ((dc.beta1, dc.Gamma1), (dc.beta2, dc.Gamma2)):
        assert g == pytest.approx(p.gamma + (p.r - p.gamma) * beta - h * beta * (beta - 1), rel=1e-12)


def test_kink_from_first_order_conditions(base_params):
    p = base_params
    # unconstrained leisure equals L exactly at the kink
    c = p.delta * p.w * p.L / (1 - p.delta)
    y = c ** (p.delta * (1 - p.k) - 1) * p.L ** ((1 - p.delta) * (1 - p.k))
    assert derive(p).y_tilde == pytest.approx(y, rel=1e-12)


@pytest.mark.parametrize("override,tag", [
    ({"gamma": 0.06}, "gamma_condition"),
    ({"mu": 0.04}, "theta_positive"),
    ({"alpha": 1.2}, "alpha_range"),
    ({"L": 1.5}, "leisure_range"),
    ({"k": 0.5}, "preference_condition"),
    ({"x0": 0.5}, "initial_wealth_condition"),
    ({"w": 0.0, "L": 1.0}, "debt_floor_condition"),
])
def test_validate_flags(base_params, override, tag):
    p = base_params.with_overrides(override)
    assert tag in validate(p)
    with pytest.raises(InvalidParams) as exc:
        derive(p)
    assert tag in exc.value.violations


def test_waiver(base_params):
    p = base_params.with_overrides({"w": 0.0, "L": 1.0})
    dc = derive(p, waive=("debt_floor_condition",))
    assert math.isinf(dc.y_tilde) and dc.A2 == 0.0


def test_nonfinite_rejected(base_params):
    assert validate(base_params.with_overrides({"r": float("nan")})) == ["finite"]


def test_load_params_and_overrides(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"k": 2, "d": 0.25}))
    p = load_params(f, ["k=4"])
    assert (p.k, p.d, p.delta) == (4.0, 0.25, 0.6)


@pytest.mark.parametrize("text", ["k", "nope=1", "k=abc"])
def test_bad_override(text):
    with pytest.raises(ConfigError):
        parse_override(text)


def test_unknown_key(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"kappa": 2}))
    with pytest.raises(ConfigError):
        load_params(f)


def test_bad_json(tmp_path):
    f = tmp_path / "c.json"
    f.write_text("{not json")
    with pytest.raises(ConfigError):
        load_params(f)


@settings(max_examples=200, deadline=None)
@given(theta=st.floats(0.01, 2.0), r=st.floats(0.001, 0.2), extra=st.floats(1e-3, 1.0))
def test_roots_bracket_zero_and_one(theta, r, extra):
    gamma = r + 0.5 * theta * theta + extra
    n1, n2 = characteristic_roots(theta, r, gamma)
    h = 0.5 * theta * theta
    for n in (n1, n2):
        assert abs(h * n * (n - 1) + (gamma - r) * n - gamma) <= 1e-9 * (1 + abs(n)) ** 2
    assert n1 < 0.0 and n2 > 1.0
