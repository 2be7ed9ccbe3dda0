"""Duality inversion, wealth thresholds and optimal controls.

Wealth and the dual variable are linked by ``x = -v'(z)``, which is
nonincreasing in ``z``. Wealth below the bankruptcy threshold ``x_bar``
maps into the stopping region: the agent files at once, wealth jumps to
``alpha (x - F)`` and the post-bankruptcy policy applies at the dual value
``z / alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .dual import consumption_leisure
from .errors import DomainError, OutOfRange
from .model import DerivedConstants, ModelParams, derive
from .pb import ReflectedSolution, solve_reflected
from .primal import REGIME_STOP, PrimalSolution


def _solve_wealth(xfun, x: float, z_top: float) -> float:
    """Root of ``xfun(z) = x`` on ``(0, z_top]`` for a nonincreasing ``xfun``."""
    if xfun(z_top) >= x:
        return z_top
    lo = z_top
    for _ in range(400):
        lo *= 0.5
        if xfun(lo) > x:
            break
    else:
        raise OutOfRange(f"wealth {x} is too large to invert")
    f = lambda s: xfun(math.exp(s)) - x  # noqa: E731
    s = brentq(f, math.log(lo), math.log(z_top), xtol=1e-15, rtol=1e-15, maxiter=500)
    return math.exp(s)


def dual_root(x: float, sol: PrimalSolution) -> float:
    """Dual value ``z`` with ``x = -v'(z)``; it minimises ``v(z) + z x``."""
    floor = sol.floor
    if not x >= floor:
        raise OutOfRange(f"wealth {x} is below the liquidity floor F + eta = {floor}")
    if sol.regime == REGIME_STOP and abs(x - x_bar(sol)) <= 1e-12 * x:
        return sol.z_bar
    z_top = sol.z_hat if math.isfinite(sol.z_hat) else sol.z_bar * 1e12
    return _solve_wealth(lambda z: -sol.v(z, 1), x, z_top)


def invert_multiplier(x: float, sol: PrimalSolution) -> tuple[float, bool]:
    """Optimal multiplier for initial wealth ``x``.

    Returns
    -------
    lambda_star : float
        Multiplier of the budget constraint the agent actually faces. In the
        continuation region it is the dual root ``z`` of ``x = -v'(z)``.
        When ``x < x_bar`` the agent files at once and the multiplier is the
        post-bankruptcy one, ``z / alpha``, which solves
        ``alpha (x - F) = -v_PB'(lambda_star)``.
    immediate_bankruptcy : bool
        True when ``x < x_bar``.
    """
    z = dual_root(x, sol)
    immediate = sol.regime == REGIME_STOP and z > sol.z_bar
    if immediate:
        return z / sol.params.alpha, True
    return z, False


def value_at(x: float, sol: PrimalSolution) -> float:
    """Primal value ``V(x) = v(z) + z x`` at the dual root ``z`` of ``x``."""
    z = dual_root(x, sol)
    return sol.v(z) + z * x


def x_bar(sol: PrimalSolution) -> float:
    """Bankruptcy wealth threshold.

    In the reflected regime wealth never falls below ``F + eta`` before a
    bankruptcy could become optimal, so the threshold is reported as the
    floor itself.
    """
    if sol.regime != REGIME_STOP:
        return sol.floor
    return -sol.value(sol.z_bar, 1)


def x_tilde_dual(sol: PrimalSolution) -> float:
    """Dual value at which full leisure (``l = L``) stops binding.

    Below the bankruptcy boundary leisure is capped when ``z < y~``; in the
    stopping region the post-bankruptcy dual is ``z / alpha``, so the cap
    binds when ``z < alpha y~``. The returned point is the supremum of the
    set where ``l* = L``, clipped to the admissible range ``z <= z_hat``.
    """
    y = sol.dc.y_tilde
    a = sol.params.alpha
    if not math.isfinite(y):
        zk = sol.z_hat
    elif sol.regime == REGIME_STOP:
        if sol.z_bar < a * y:
            zk = a * y
        elif sol.z_bar < y:
            zk = sol.z_bar
        else:
            zk = y
    else:
        zk = y
    return min(zk, sol.z_hat)


def thresholds(sol: PrimalSolution) -> tuple[float, float, float]:
    """``(x_bar, x_hat, x_tilde)``: bankruptcy, liquidity and full-leisure wealth."""
    xh = -sol.v(sol.z_hat * (1 - 1e-15), 1) if math.isfinite(sol.z_hat) else sol.floor
    zk = x_tilde_dual(sol)
    xt = -sol.v(zk * (1 - 1e-15), 1) if math.isfinite(zk) else sol.floor
    return x_bar(sol), xh, xt


@dataclass(frozen=True)
class Controls:
    c: float
    l: float
    pi: float
    X: float
    regime: str  # "pre" before bankruptcy, "post" after the wealth jump


def controls_at(z: float, sol: PrimalSolution) -> Controls:
    """Optimal controls at dual value ``z``.

    In the stopping region the controls are the post-bankruptcy ones at
    ``z / alpha`` and ``X`` is the post-jump wealth ``alpha (x - F)``.
    """
    if not z > 0.0:
        raise DomainError("dual variable must be positive")
    p = sol.params
    dc = sol.dc
    if sol.regime == REGIME_STOP and z >= sol.z_bar:
        return post_controls(z / p.alpha, sol.pb)
    c, l = consumption_leisure(z, dc)
    zc = min(z, sol.z_hat)
    pi = dc.theta / p.sigma * zc * sol.v(zc, 2)
    return Controls(c, l, pi, -sol.v(zc, 1), "pre")


def post_controls(zp: float, pb: ReflectedSolution) -> Controls:
    """Controls of a reflected problem (e.g. after bankruptcy) at dual ``zp``."""
    dc = pb.dc
    p = dc.params
    zp = min(zp, pb.z_hat)
    c, l = consumption_leisure(zp, dc)
    pi = dc.theta / p.sigma * zp * pb.v(zp, 2)
    return Controls(c, l, pi, -pb.v(zp, 1), "post")


def controls_at_wealth(x: float, sol: PrimalSolution) -> Controls:
    return controls_at(dual_root(x, sol), sol)


@dataclass(frozen=True)
class PolicyMaps:
    """Solved policy for one initial wealth."""

    sol: PrimalSolution
    x0: float
    lambda_star: float
    z0: float  # dual root of x0 = -v'(z0); equals lambda_star unless filing at once
    V_x: float
    x_bar: float
    x_hat: float
    x_tilde: float
    immediate_bankruptcy: bool

    def controls(self, z: float) -> Controls:
        return controls_at(z, self.sol)

    def report(self) -> dict:
        s = self.sol
        return {
            "case": s.case_tag,
            "regime": s.regime,
            "z_bar": s.z_bar,
            "z_hat": s.z_hat,
            "y_tilde": s.dc.y_tilde,
            "z_hat_pb": s.pb.z_hat,
            "pb_case": s.pb.case_tag,
            "coeffs": dict(s.coeffs),
            "pb_coeffs": dict(s.pb.coeffs),
            "x0": self.x0,
            "lambda_star": self.lambda_star,
            "z0": self.z0,
            "V": self.V_x,
            "immediate_bankruptcy": self.immediate_bankruptcy,
            "x_bar": self.x_bar,
            "x_hat": self.x_hat,
            "x_tilde": self.x_tilde,
        }


def policy_maps(sol: PrimalSolution, x0: float | None = None) -> PolicyMaps:
    x0 = sol.params.x0 if x0 is None else x0
    lam, immediate = invert_multiplier(x0, sol)
    z0 = dual_root(x0, sol)
    xb, xh, xt = thresholds(sol)
    return PolicyMaps(sol, x0, lam, z0, sol.v(z0) + z0 * x0, xb, xh, xt, immediate)


# --- no-bankruptcy benchmark -------------------------------------------------

class NoBankruptcySolution(ReflectedSolution):
    """Benchmark without the bankruptcy option: wealth is kept above ``F + eta``."""

    @property
    def z_hat_nob(self) -> float:
        return self.z_hat

    def wealth(self, z):
        return -self.v(z, 1)

    def invert(self, x: float) -> float:
        if not x >= self.floor:
            raise OutOfRange(f"wealth {x} is below the liquidity floor {self.floor}")
        z_top = self.z_hat if math.isfinite(self.z_hat) else 1e12
        return _solve_wealth(lambda z: -self.v(z, 1), x, z_top)

    def value_at(self, x: float) -> float:
        lam = self.invert(x)
        return self.v(lam) + lam * x

    def controls(self, z: float) -> Controls:
        c = post_controls(z, self)
        return Controls(c.c, c.l, c.pi, c.X, "nob")

    def controls_at_wealth(self, x: float) -> Controls:
        return self.controls(self.invert(x))


def solve_no_bankruptcy(params: ModelParams, dc: DerivedConstants | None = None,
                        waive=()) -> NoBankruptcySolution:
    """Benchmark problem with debt service ``d`` and floor ``F + eta``, no stopping."""
    if dc is None:
        dc = derive(params, waive=waive)
    return solve_reflected(dc, params.d, params.F + params.eta, cls=NoBankruptcySolution)
