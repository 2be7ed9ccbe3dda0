import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optbankrupt import ConfigError, ModelParams, policy_maps, solve_model, thresholds
from optbankrupt.sim import (SimConfig, backend, budget_check, budget_check_paths, simulate,
                             wealth_gap)
from optbankrupt.sim import _fallback
from optbankrupt.sim.engine import budget_contributions

compiled = pytest.mark.skipif(not backend.COMPILED, reason="extension not built")


@pytest.fixture(scope="module")
def paths(sim_sol):
    return simulate(sim_sol, policy_maps(sim_sol), SimConfig(horizon=30, n_paths=20, seed=42))


def test_config_errors():
    with pytest.raises(ConfigError):
        SimConfig(dt=0.0)
    with pytest.raises(ConfigError):
        SimConfig(horizon=-1.0)
    with pytest.raises(ConfigError):
        SimConfig(n_paths=0)
    with pytest.raises(ConfigError):
        SimConfig(seed=-1)


def test_determinism(sim_sol):
    cfg = SimConfig(horizon=5, n_paths=3, seed=9)
    a = simulate(sim_sol, None, cfg)
    b = simulate(sim_sol, None, cfg)
    for p, q in zip(a, b):
        assert np.array_equal(p.z_path, q.z_path) and np.array_equal(p.x_path, q.x_path)
    c = simulate(sim_sol, None, SimConfig(horizon=5, n_paths=3, seed=10))
    assert not np.array_equal(a[0].z_path, c[0].z_path)


def test_streams_are_order_independent(sim_sol):
    many = simulate(sim_sol, None, SimConfig(horizon=2, n_paths=4, seed=5))
    one = simulate(sim_sol, None, SimConfig(horizon=2, n_paths=1, seed=5))
    assert np.array_equal(many[0].z_path, one[0].z_path)


@compiled
def test_backends_agree(sim_sol):
    out_c, out_f = np.empty(4097), np.empty(4097)
    backend.kernels.fill_normals(3, 7, 1, out_c)
    _fallback.fill_normals(3, 7, 1, out_f)
    assert np.max(np.abs(out_c - out_f)) <= 1e-14
    cfg = SimConfig(horizon=20, n_paths=64, seed=8)
    fast, _ = budget_contributions(sim_sol, cfg)
    saved = backend.kernels
    backend.kernels = _fallback
    try:
        slow, _ = budget_contributions(sim_sol, cfg)
    finally:
        backend.kernels = saved
    assert np.allclose(fast, slow, rtol=1e-10)


def test_normal_moments():
    out = np.empty(200_000)
    backend.kernels.fill_normals(1, 0, 0, out)
    n = out.size
    assert abs(out.mean()) <= 4 / math.sqrt(n)
    assert abs(out.var() - 1) <= 4 * math.sqrt(2 / n)
    assert abs(np.mean(out[:-1] * out[1:])) <= 4 / math.sqrt(n)


def test_log_increments_are_exact_gbm(sim_sol, paths):
    p = sim_sol.params
    th = sim_sol.dc.theta
    dt = 1e-3
    inc = np.concatenate([np.diff(np.log(r.z_path[: r.stop_index])) for r in paths])
    n = inc.size
    m, s = (p.gamma - p.r - 0.5 * th * th) * dt, th * math.sqrt(dt)
    assert abs(inc.mean() - m) <= 4 * s / math.sqrt(n)
    assert abs(inc.std() - s) <= 4 * s / math.sqrt(2 * n)


def test_jump_identity_and_floors(sim_sol, paths):
    p = sim_sol.params
    xb = thresholds(sim_sol)[0]
    for r in paths:
        assert r.tau is not None
        x_tau, x_post = r.jump
        assert x_post == p.alpha * (x_tau - p.F)
        assert x_tau == pytest.approx(xb)
        pre = ~r.post
        assert np.all(r.x_path[pre] >= sim_sol.floor - 1e-9)
        assert np.all(r.x_path[r.post] >= -1e-9)
        assert np.all(r.z_path[pre] < sim_sol.z_bar)
        assert r.x_path[r.stop_index] == pytest.approx(x_post, rel=0.05)


def test_full_leisure_after_bankruptcy(paths):
    for r in paths:
        assert r.l_path[r.stop_index] == 0.8


def test_downward_jump_in_controls(paths):
    dc = np.mean([r.c_path[r.stop_index - 1] - r.c_path[r.stop_index] for r in paths])
    dpi = np.mean([r.pi_path[r.stop_index - 1] - r.pi_path[r.stop_index] for r in paths])
    assert dc > 0 and dpi > 0


@pytest.mark.parametrize("k,x_bar", [(2, 7.4777), (3, 10.0651), (4, 12.4239)])
def test_crossing_wealth(k, x_bar):
    sol = solve_model(ModelParams(k=k, x0=25.0))
    cfg = SimConfig(horizon=40, n_paths=5, seed=k)
    for r in simulate(sol, None, cfg):
        i = r.stop_index
        assert r.jump[0] == pytest.approx(x_bar, rel=5e-4)
        last = r.x_path[i - 1]
        step = sol.params.sigma * r.pi_path[i - 1] * math.sqrt(cfg.dt)
        assert x_bar * (1 - 5e-4) <= last <= x_bar + 5 * step
        assert r.times[i - 1] <= r.tau <= r.times[i]


def test_immediate_bankruptcy_path(base_sol):
    r = simulate(base_sol, None, SimConfig(horizon=1, n_paths=1, seed=1))[0]
    p = base_sol.params
    assert r.tau == 0.0 and r.stop_index == 0
    assert r.jump == (6.6, p.alpha * (6.6 - p.F))
    assert r.x_path[0] == pytest.approx(r.jump[1], rel=1e-10)


def test_tail_shrinks_with_horizon(sim_sol):
    tails = []
    for h in (10, 25, 50):
        _, tail = budget_contributions(sim_sol, SimConfig(horizon=h, n_paths=3000, seed=4))
        tails.append(tail / 3000)
    assert tails[0] > tails[1] >= tails[2]
    assert tails[2] < 0.01


def test_budget_identity_small(sim_sol):
    est = budget_check(sim_sol, SimConfig(n_paths=4000, seed=77))
    assert abs(est.estimate) <= 3 * est.se
    bad = budget_check(sim_sol, SimConfig(n_paths=4000, seed=77), c_scale=1.1)
    assert bad.estimate > 3 * bad.se


def test_budget_from_paths_matches_kernel(sim_sol):
    cfg = SimConfig(horizon=50, n_paths=30, seed=12)
    from_paths = budget_check_paths(simulate(sim_sol, None, cfg), sim_sol, 25.0)
    vals, _ = budget_contributions(sim_sol, cfg)
    assert from_paths.estimate == pytest.approx(vals.mean() - 25.0, abs=1e-8)


def test_reflected_regime_paths():
    sol = solve_model(ModelParams(F=1.5, d=0.05, x0=5.0))
    for r in simulate(sol, None, SimConfig(horizon=20, n_paths=3, seed=3)):
        assert r.tau is None
        assert np.all(r.z_path <= sol.z_hat * (1 + 1e-12))
        assert np.all(r.x_path >= sol.floor - 1e-9)


def test_wealth_gap_first_order(sim_sol):
    g = [wealth_gap(sim_sol, 25.0, 1e-2, 5.0, 20, seed=2, refine=r) for r in (1, 2)]
    assert 1.4 <= g[0] / g[1] <= 2.6


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-0.5, 0.5), min_size=1, max_size=200), st.floats(-1, 1),
       st.floats(-0.5, 2.0))
def test_reflected_walk_property(incr, start, cap):
    incr = np.asarray(incr)
    out = np.empty(incr.size + 1)
    backend.kernels.reflected_walk(incr, start, cap, out)
    ref = [min(start, cap)]
    for x in incr:
        ref.append(min(ref[-1] + x, cap))
    assert np.allclose(out, ref, atol=1e-12)
    alt = np.empty_like(out)
    _fallback.reflected_walk(incr, start, cap, alt)
    assert np.allclose(out, alt, atol=1e-12)
