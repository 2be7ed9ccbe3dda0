"""Pre-bankruptcy free-boundary problem.

The dual value ``v`` solves the ODE on the continuation region
``(0, z_bar)``, pastes C1 onto ``U~`` at the bankruptcy boundary ``z_bar``,
and the liquidity boundary ``z_hat`` solves ``U~'(z_hat) = -(F + eta)``.
When the stopping boundary would lie beyond the liquidity boundary
(``z_bar >= z_hat``), the value is the reflected solution with floor
``F + eta`` and ``z_bar`` is the zero of ``h``.

The seven candidate systems are labelled ``"Case 1"`` .. ``"Case 7"``:

====  ====================================================  =========
case  ordering                                              pieces
====  ====================================================  =========
1     0 < z_bar < z_hat < a*y~ <= a*z_pb                    v: 1, U~: low
2     0 < z_bar < a*y~ <= z_hat <= a*z_pb                   v: 1, U~: low / high
3     a*y~ < z_bar < z_hat <= a*z_pb, z_bar < y~            v: 1, U~: high
4     0 < z_bar < z_hat <= a*z_pb < a*y~                    v: 1, U~: single
5     y~ <= z_bar < z_hat <= a*z_pb                         v: 2, U~: high
6     y~ <= z_hat <= z_bar                                  v: 2 (reflected)
7     z_hat < y~, z_hat <= z_bar                            v: 1 (reflected)
====  ====================================================  =========

(``a`` is the retention fraction, ``y~`` the leisure kink and ``z_pb`` the
post-bankruptcy boundary.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._powers import PowerSum
from ._roots import scan_roots
from .dual import U_tilde, u_tilde_deriv
from .errors import (BracketingFailure, DomainError, MultipleCasesAdmissible,
                     NoCaseAdmissible)
from .model import DerivedConstants, ModelParams, derive
from .pb import (ORDER_SLACK, PbSolution, Piecewise, candidates, kink_coupling,
                 ode_residual, particular, pasting_residuals, polish, solve_pb)

CASES = tuple(f"Case {i}" for i in range(1, 8))
REGIME_STOP = "z_bar<z_hat"
REGIME_REFLECT = "z_bar>=z_hat"


@dataclass(frozen=True)
class HFunction:
    """Context for ``h(z) = u~(z) - u~(z/alpha) + (rF - d + w L_bar - w L_bar/alpha) z``."""

    params: ModelParams
    dc: DerivedConstants
    pb: PbSolution | None = None

    @property
    def slope(self) -> float:
        p = self.params
        return p.r * p.F - p.d + p.w * p.L_bar - p.w * p.L_bar / p.alpha


def h_eval(z, ctx: HFunction):
    """Evaluate ``h`` (defined on the whole positive half-line)."""
    a = ctx.params.alpha
    z_arr = np.asarray(z, dtype=float) if np.ndim(z) else float(z)
    if np.any(~(np.asarray(z) > 0.0)):
        raise DomainError("dual variable must be positive")
    return u_tilde_deriv(z_arr, ctx.dc) - u_tilde_deriv(z_arr / a, ctx.dc) + ctx.slope * z_arr


def find_h_root(ctx: HFunction) -> float:
    """Unique positive zero of ``h``.

    ``h`` is positive near zero and concave, so the zero separates the
    region where stopping is locally profitable (``h < 0``) from the rest.
    """
    f = lambda z: h_eval(z, ctx)  # noqa: E731
    roots = scan_roots(f, 1e-12, 1e12, per_decade=10)
    if not roots:
        raise BracketingFailure("h has no sign change on [1e-12, 1e12]")
    return roots[0]


@dataclass(frozen=True)
class PrimalSolution:
    """Solved pre-bankruptcy problem.

    Attributes
    ----------
    case_tag : str
        One of ``"Case 1"`` .. ``"Case 7"``.
    z_bar, z_hat : float
        Bankruptcy and liquidity boundaries in the dual variable.
    coeffs : dict
        ``{B2}`` for one-piece values, ``{B21, B12, B22}`` for two-piece ones.
    regime : str
        ``"z_bar<z_hat"`` (stopping is active) or ``"z_bar>=z_hat"``.
    """

    case_tag: str
    z_bar: float
    z_hat: float
    coeffs: dict
    pb: PbSolution
    regime: str
    value: Piecewise = field(repr=False)
    residuals: dict = field(default_factory=dict, repr=False)
    z_h: float = math.nan

    @property
    def dc(self) -> DerivedConstants:
        return self.pb.dc

    @property
    def params(self) -> ModelParams:
        return self.pb.dc.params

    @property
    def floor(self) -> float:
        return self.params.F + self.params.eta

    @property
    def z_cont(self) -> float:
        """Upper end of the region where ``v`` is the ODE solution."""
        return self.z_bar if self.regime == REGIME_STOP else self.z_hat

    def U(self, z, m: int = 0):
        return U_tilde(z, self.pb, m=m)

    def v(self, z, m: int = 0):
        """``m``-th derivative of the dual value function."""
        if np.any(~(np.asarray(z) > 0.0)):
            raise DomainError("dual variable must be positive")
        if np.ndim(z) == 0:
            return self._v_scalar(z if isinstance(z, np.longdouble) else float(z), m)
        z = np.asarray(z, dtype=float)
        return np.array([self._v_scalar(float(t), m) for t in z.ravel()]).reshape(z.shape)

    def _v_scalar(self, z, m):
        zb, zh, fl = self.z_bar, self.z_hat, self.floor
        if self.regime == REGIME_STOP:
            if z < zb:
                return self.value(z, m)
            if z < zh:
                return self.U(z, m)
            return _linear(self.U(zh), zh, fl, z, m)
        if z < zh:
            return self.value(z, m)
        if z < zb:
            return _linear(self.value(zh), zh, fl, z, m)
        return self.U(z, m)

    def to_dict(self) -> dict:
        return {
            "case_tag": self.case_tag,
            "z_bar": self.z_bar,
            "z_hat": self.z_hat,
            "coeffs": dict(self.coeffs),
            "regime": self.regime,
            "z_h": self.z_h,
            "residuals": dict(self.residuals),
            "pb": self.pb.to_dict(),
        }


def _linear(v0, z0, floor, z, m):
    if m == 0:
        return v0 - floor * (z - z0)
    return -floor if m == 1 else 0.0


def v_eval(z, sol: PrimalSolution) -> tuple[float, float, float]:
    return sol.v(z, 0), sol.v(z, 1), sol.v(z, 2)


# --- the stopping-regime systems (cases 1-5) ---------------------------------

def _u_piece(pb: PbSolution, which: str) -> PowerSum:
    """Closed form of ``U~`` when ``z/alpha`` lies on one piece of ``v_PB``."""
    p = pb.dc.params
    piece = pb.value.pieces[0] if which == "lo" else pb.value.pieces[-1]
    return piece.rescaled(p.alpha) + PowerSum.of((-p.F, 1.0))


@dataclass(frozen=True)
class _Spec:
    tag: str
    pb_case: str
    zbar_piece: str
    zhat_piece: str
    two_piece: bool


_STOP_SPECS = (
    _Spec("Case 1", "Case1", "lo", "lo", False),
    _Spec("Case 2", "Case1", "lo", "hi", False),
    _Spec("Case 3", "Case1", "hi", "hi", False),
    _Spec("Case 4", "Case2", "lo", "lo", False),
    _Spec("Case 5", "Case1", "hi", "hi", True),
)


def _zbar_window(spec: _Spec, y: float, a: float, zpb: float) -> tuple[float, float]:
    if spec.tag in ("Case 1", "Case 2"):
        return 0.0, a * y
    if spec.tag == "Case 3":
        return a * y, min(y, a * zpb)
    if spec.tag == "Case 4":
        return 0.0, a * zpb
    return y, a * zpb


def _chain_ok(spec: _Spec, zb: float, zh: float, y: float, a: float, zpb: float) -> bool:
    s = ORDER_SLACK * max(1.0, zh if math.isfinite(zh) else 1.0)
    lt = lambda u, v: u < v + s  # noqa: E731
    le = lt
    if not (zb > 0 and lt(zb, zh) and le(zh, a * zpb)):
        return False
    if spec.tag == "Case 1":
        return lt(zh, a * y)
    if spec.tag == "Case 2":
        return lt(zb, a * y) and le(a * y, zh)
    if spec.tag == "Case 3":
        return lt(a * y, zb) and lt(zb, y)
    if spec.tag == "Case 4":
        # without labour income both the kink and the boundary are infinite
        return lt(zb, zh) and (not math.isfinite(y) or lt(a * zpb, a * y))
    return le(y, zb)


def _stop_candidates(spec: _Spec, pb: PbSolution):
    dc = pb.dc
    p = dc.params
    y, a, zpb = dc.y_tilde, p.alpha, pb.z_hat
    if pb.case_tag != spec.pb_case:
        return []
    lo_part, hi_part = particular(dc, p.d)
    u_bar = _u_piece(pb, spec.zbar_piece)
    if spec.two_piece:
        try:
            B12, E = kink_coupling(dc, p.d)
        except (ZeroDivisionError, OverflowError):
            return []
        D = u_bar - hi_part - PowerSum.of((B12, dc.n1))
    else:
        D = u_bar - lo_part
    g = D.euler(dc.n2, cancel=dc.n2)
    lo, hi = _zbar_window(spec, y, a, zpb)
    hi = min(hi, 1e12)
    lo = max(lo * (1 - 1e-9), hi * 1e-14)
    if not hi > lo:
        return []
    floor = p.F + p.eta
    u_hat = _u_piece(pb, spec.zhat_piece)
    out = []
    for zb in scan_roots(lambda z: g(z) / z, lo, hi * (1 + 1e-9)):
        Bn2 = D(zb) / zb ** dc.n2
        zh = _solve_zhat(u_hat, floor, zb, spec, y, a, zpb)
        if zh is None or not _chain_ok(spec, zb, zh, y, a, zpb):
            continue
        if spec.two_piece:
            coeffs = {"B21": E + Bn2, "B12": B12, "B22": Bn2}
        else:
            coeffs = {"B2": Bn2}
        out.append((spec.tag, zb, zh, coeffs))
    return out


def _solve_zhat(u_hat: PowerSum, floor: float, zb: float, spec: _Spec, y, a, zpb):
    """Root of ``U~'(z) + F + eta`` on the case's window for ``z_hat``."""
    f = lambda z: u_hat(z, 1) + floor  # noqa: E731
    lo = zb
    if spec.tag == "Case 2":
        lo = max(zb, a * y * (1 - 1e-9))
    hi = a * zpb
    if spec.tag == "Case 1":
        hi = a * y
    if not math.isfinite(hi):
        hi = zb * 1e12
    hi_ext = hi * (1 + 1e-9)
    if abs(f(hi)) <= 1e-12 * max(1.0, floor):
        # eta = 0: the liquidity boundary sits at the end of the window
        return hi
    roots = scan_roots(f, lo, hi_ext, per_decade=20)
    if not roots:
        return None
    return roots[0]


def _reflect_candidates(tag: str, pb: PbSolution, z_h: float):
    dc = pb.dc
    p = dc.params
    floor = p.F + p.eta
    pb_tag = "Case1" if tag == "Case 6" else "Case2"
    out = []
    for coeffs, zh in candidates(dc, p.d, floor, pb_tag):
        coeffs, zh = polish(dc, p.d, floor, pb_tag, coeffs, zh)
        if z_h >= zh - ORDER_SLACK * max(1.0, zh):
            out.append((tag, z_h, zh, coeffs))
    return out


def _build_value(dc, tag, coeffs) -> Piecewise:
    lo_part, hi_part = particular(dc, dc.params.d)
    if "B2" in coeffs:
        return Piecewise((), (PowerSum.of((coeffs["B2"], dc.n2)) + lo_part,))
    lo = PowerSum.of((coeffs["B21"], dc.n2)) + lo_part
    hi = PowerSum.of((coeffs["B12"], dc.n1), (coeffs["B22"], dc.n2)) + hi_part
    return Piecewise((dc.y_tilde,), (lo, hi))


def _residuals(sol: PrimalSolution) -> dict:
    p = sol.params
    floor = p.F + p.eta
    dc = sol.dc
    if sol.regime == REGIME_REFLECT:
        tag = "Case1" if "B21" in sol.coeffs else "Case2"
        return pasting_residuals(dc, p.d, floor, tag, sol.coeffs, sol.z_hat)
    zb, zh = sol.z_bar, sol.z_hat
    cont = sol.value.pieces[-1]
    out = {
        "C0_z_bar": cont(zb) - sol.U(zb),
        "C1_z_bar": cont(zb, 1) - sol.U(zb, 1),
        "z_hat_eq": sol.U(zh, 1) + floor,
    }
    if len(sol.value.pieces) == 2:
        y = dc.y_tilde
        lo, hi = sol.value.pieces
        out["C0_kink"] = hi(y) - lo(y)
        out["C1_kink"] = hi(y, 1) - lo(y, 1)
    return out


def enumerate_cases(params: ModelParams, dc: DerivedConstants, pb: PbSolution):
    """Every admissible (tag, z_bar, z_hat, coeffs) over the seven systems."""
    ctx = HFunction(params, dc, pb)
    z_h = find_h_root(ctx)
    found = []
    for spec in _STOP_SPECS:
        found.extend(_stop_candidates(spec, pb))
    for tag in ("Case 6", "Case 7"):
        found.extend(_reflect_candidates(tag, pb, z_h))
    return found, z_h


def solve_primal(params: ModelParams, dc: DerivedConstants | None = None,
                 pb: PbSolution | None = None) -> PrimalSolution:
    """Solve the pre-bankruptcy problem and identify the admissible case.

    Raises
    ------
    NoCaseAdmissible, MultipleCasesAdmissible
    """
    if dc is None:
        dc = derive(params)
    if pb is None:
        pb = solve_pb(params, dc)
    found, z_h = enumerate_cases(params, dc, pb)
    if not found:
        raise NoCaseAdmissible(
            f"no case admits a solution (post-bankruptcy {pb.case_tag}, "
            f"h-root {z_h:.6g}, kink {dc.y_tilde:.6g})")
    if len(found) > 1:
        raise MultipleCasesAdmissible(
            "admissible: " + ", ".join(f"{t} (z_bar={zb:.6g}, z_hat={zh:.6g})"
                                       for t, zb, zh, _ in found))
    tag, zb, zh, coeffs = found[0]
    regime = REGIME_REFLECT if tag in ("Case 6", "Case 7") else REGIME_STOP
    sol = PrimalSolution(tag, zb, zh, coeffs, pb, regime, _build_value(dc, tag, coeffs), {}, z_h)
    object.__setattr__(sol, "residuals", _residuals(sol))
    return sol


def find_z_bar(ctx: HFunction) -> float:
    """Bankruptcy boundary of the solved problem.

    In the stopping regime this is the smooth-pasting point, which lies
    strictly above the zero of ``h``; in the reflected regime it is the zero
    of ``h`` itself.
    """
    return solve_primal(ctx.params, ctx.dc, ctx.pb).z_bar


# --- audits ------------------------------------------------------------------

def audit(sol: PrimalSolution, n: int = 1000) -> dict:
    """Sampled residuals and inequality margins of the solved system.

    Values named ``*_max_abs`` should be ~0; ``*_max`` must be <= 0 and
    ``*_min`` >= 0 (up to the audit slack).
    """
    p = sol.params
    dc = sol.dc
    pb = sol.pb
    floor = p.F + p.eta
    out = {"pasting_max_abs": max(abs(v) for v in sol.residuals.values())}
    out["pb_pasting_max_abs"] = max(abs(v) for v in pb.residuals.values()) if pb.residuals else 0.0

    zc = sol.z_cont
    zs = zc * np.geomspace(1e-4, 1 - 1e-9, n)
    v0, v1, v2 = (sol.value(zs, j) for j in range(3))
    out["ode_v_max_abs"] = float(np.max(np.abs(ode_residual(dc, zs, v0, v1, v2, p.d))))
    out["v_convexity_min"] = float(np.min(v2))
    out["V5_v_minus_U_min"] = float(np.min(sol.v(sol.z_bar * np.geomspace(1e-4, 1 - 1e-9, n))
                                           - sol.U(sol.z_bar * np.geomspace(1e-4, 1 - 1e-9, n))))
    zz = sol.z_hat * np.geomspace(1e-4, 1 - 1e-9, n) if math.isfinite(sol.z_hat) else \
        np.geomspace(1e-4, 1e4, n) * sol.z_bar
    out["V2_slope_max"] = float(np.max(sol.v(zz, 1) + floor))
    if sol.regime == REGIME_STOP:
        zs4 = np.linspace(sol.z_bar, sol.z_hat, n, endpoint=False)
        u0, u1, u2 = sol.U(zs4, 0), sol.U(zs4, 1), sol.U(zs4, 2)
    else:
        zs4 = np.linspace(sol.z_hat, sol.z_bar, n, endpoint=False) if sol.z_bar > sol.z_hat \
            else np.array([sol.z_hat])
        u0 = sol.v(zs4, 0)
        u1 = np.full_like(zs4, -floor)
        u2 = np.zeros_like(zs4)
    out["V4_operator_max"] = float(np.max(ode_residual(dc, zs4, u0, u1, u2, p.d)))

    # without a post-bankruptcy boundary, sample where post-bankruptcy duals start
    zp = pb.z_hat if math.isfinite(pb.z_hat) else 100.0 * sol.z_bar / p.alpha
    zs = zp * np.geomspace(1e-4, 1 - 1e-9, n)
    w0, w1, w2 = (pb.value(zs, j) for j in range(3))
    out["ode_pb_max_abs"] = float(np.max(np.abs(ode_residual(dc, zs, w0, w1, w2, 0.0))))
    out["pb_V2_slope_max"] = float(np.max(w1))
    out["pb_convexity_min"] = float(np.min(w2))
    if math.isfinite(pb.z_hat):
        zs = pb.z_hat * np.geomspace(1.0, 1e3, n)
        flat = pb.v(zs, 0)
        out["pb_V4_operator_min"] = float(np.min(ode_residual(
            dc, zs, flat, np.zeros_like(zs), np.zeros_like(zs), 0.0)))
    else:
        out["pb_V4_operator_min"] = 0.0
    return out


def audit_passes(report: dict, slack: float = 1e-8) -> dict:
    """Pass/fail per audit entry."""
    checks = {}
    for key, val in report.items():
        if key.endswith("_max_abs"):
            lim = 1e-10 if key.startswith(("pasting", "pb_pasting")) else slack
            checks[key] = abs(val) <= lim
        elif key.endswith("convexity_min"):
            checks[key] = val >= -1e-10
        elif key.endswith("_max"):
            checks[key] = val <= slack
        elif key.endswith("_min"):
            checks[key] = val >= -slack
    return checks
