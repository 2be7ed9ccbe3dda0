"""Reflected free-boundary problems of the dual ODE.

The post-bankruptcy problem, the no-bankruptcy benchmark and the two
primal cases without an active stopping boundary share one structure:
on ``(0, z_hat)`` the value solves

    -gamma v + (gamma - r) z v' + (theta^2/2) z^2 v'' + u~(z) + (w L_bar - debt) z = 0,

and at ``z_hat`` the slope reaches the floor, ``v'(z_hat) = -floor``, with
``v''(z_hat) = 0``. Beyond ``z_hat`` the value continues linearly. Only the
``z**n2`` homogeneous solution is kept near zero (``n1 < 0`` would explode).
The post-bankruptcy problem is ``debt = 0, floor = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._powers import PowerSum
from ._roots import damped_newton, scan_roots
from .dual import u_tilde_deriv
from .errors import BothCasesAdmissible, DomainError, NoCaseAdmissible
from .model import DerivedConstants, ModelParams, derive

ORDER_SLACK = 1e-9


@dataclass(frozen=True)
class Piecewise:
    """Power sums on consecutive intervals split at ``breaks``."""

    breaks: tuple[float, ...]
    pieces: tuple[PowerSum, ...]

    def __call__(self, z, m: int = 0):
        if not self.breaks:
            return self.pieces[0](z, m)
        if np.ndim(z) == 0:
            i = int(np.searchsorted(self.breaks, z, side="right"))
            return self.pieces[i](z, m)
        z = np.asarray(z, dtype=float)
        idx = np.searchsorted(self.breaks, z, side="right")
        out = np.empty_like(z)
        for i, piece in enumerate(self.pieces):
            sel = idx == i
            if np.any(sel):
                out[sel] = piece(z[sel], m)
        return out


def particular(dc: DerivedConstants, debt: float) -> tuple[PowerSum, PowerSum]:
    """Particular solutions of the ODE below and above the leisure kink."""
    p = dc.params
    lo = PowerSum.of((dc.A1 / dc.Gamma1, dc.beta1), ((p.w * (p.L_bar - p.L) - debt) / p.r, 1.0))
    hi = PowerSum.of((dc.A2 / dc.Gamma2, dc.beta2), ((p.w * p.L_bar - debt) / p.r, 1.0))
    return lo, hi


def kink_coupling(dc: DerivedConstants, debt: float = 0.0) -> tuple[float, float]:
    """Coefficients fixed by C0/C1 matching at the kink of a two-piece value.

    A value equal to ``B21 z^n2 + lo(z)`` below the kink and
    ``B12 z^n1 + B22 z^n2 + hi(z)`` above it is C1 at the kink iff ``B12``
    and ``E = B21 - B22`` take the returned values, whatever the boundary.
    """
    y = dc.y_tilde
    n1, n2 = dc.n1, dc.n2
    lo, hi = particular(dc, debt)
    d0 = hi(y) - lo(y)
    d1 = hi(y, 1) - lo(y, 1)
    B12 = (d1 - n2 * d0 / y) / ((n2 - n1) * y ** (n1 - 1.0))
    E = (d1 - n1 * d0 / y) / ((n2 - n1) * y ** (n2 - 1.0))
    return B12, E


def ode_residual(dc: DerivedConstants, z, v0, v1, v2, debt: float):
    """Residual of the dual ODE given value and derivatives at ``z``."""
    p = dc.params
    th2 = 0.5 * dc.theta**2
    return (-p.gamma * v0 + (p.gamma - p.r) * z * v1 + th2 * z * z * v2
            + u_tilde_deriv(z, dc) + (p.w * p.L_bar - debt) * z)


@dataclass(frozen=True)
class ReflectedSolution:
    """Closed-form value of a reflected problem.

    Attributes
    ----------
    case_tag : str
        ``"Case1"`` when the kink lies below the boundary (two-piece value),
        ``"Case2"`` when the boundary lies below the kink (one piece).
    z_hat : float
        Free boundary (``inf`` when no finite boundary exists).
    coeffs : dict
        ``{B21, B12, B22}`` for Case1, ``{B2}`` for Case2.
    """

    case_tag: str
    z_hat: float
    coeffs: dict
    dc: DerivedConstants
    debt: float
    floor: float
    value: Piecewise = field(repr=False)
    residuals: dict = field(default_factory=dict, repr=False)

    @property
    def derived(self) -> DerivedConstants:
        return self.dc

    def v(self, z, m: int = 0):
        """``m``-th derivative of the value; linear beyond ``z_hat``."""
        if np.any(~(np.asarray(z) > 0.0)):
            raise DomainError("dual variable must be positive")
        zh = self.z_hat
        if np.ndim(z) == 0:
            if z < zh:
                return self.value(z, m)
            return self._tail(z, m)
        z = np.asarray(z, dtype=float)
        out = np.empty_like(z)
        inside = z < zh
        out[inside] = self.value(z[inside], m)
        out[~inside] = self._tail(z[~inside], m)
        return out

    def _tail(self, z, m):
        zh = self.z_hat
        if m == 0:
            return self.value(zh) - self.floor * (np.asarray(z) - zh) if np.ndim(z) else \
                self.value(zh) - self.floor * (z - zh)
        if m == 1:
            return np.full(np.shape(z), -self.floor) if np.ndim(z) else -self.floor
        return np.zeros(np.shape(z)) if np.ndim(z) else 0.0

    def to_dict(self) -> dict:
        return {
            "case_tag": self.case_tag,
            "z_hat": self.z_hat,
            "coeffs": dict(self.coeffs),
            "debt": self.debt,
            "floor": self.floor,
            "residuals": dict(self.residuals),
        }


class PbSolution(ReflectedSolution):
    """Post-bankruptcy solution (no debt, zero slope at the boundary)."""

    @property
    def z_hat_pb(self) -> float:
        return self.z_hat

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["z_hat_pb"] = d.pop("z_hat")
        d["coeffs"] = {k + "_pb": v for k, v in self.coeffs.items()}
        return d


# --- candidate systems -------------------------------------------------------

def _single_piece(dc, debt, floor, z):
    """B2 from C1 at ``z``; returns (B2, scaled C2 residual)."""
    lo, _ = particular(dc, debt)
    n2 = dc.n2
    B2 = (-floor - lo(z, 1)) / (n2 * z ** (n2 - 1.0))
    c2 = n2 * (n2 - 1.0) * B2 * z ** (n2 - 2.0) + lo(z, 2)
    return B2, c2 * z


def _two_piece(dc, debt, floor, z, coupling):
    """(B21, B12, B22) from kink matching and C1 at ``z``; plus scaled C2 residual."""
    _, hi = particular(dc, debt)
    n1, n2 = dc.n1, dc.n2
    B12, E = coupling
    B22 = (-floor - hi(z, 1) - n1 * B12 * z ** (n1 - 1.0)) / (n2 * z ** (n2 - 1.0))
    c2 = (n1 * (n1 - 1.0) * B12 * z ** (n1 - 2.0)
          + n2 * (n2 - 1.0) * B22 * z ** (n2 - 2.0) + hi(z, 2))
    return (E + B22, B12, B22), c2 * z


def build_value(dc, debt, case_tag, coeffs) -> Piecewise:
    lo, hi = particular(dc, debt)
    if case_tag == "Case2":
        return Piecewise((), (PowerSum.of((coeffs["B2"], dc.n2)) + lo,))
    lo_piece = PowerSum.of((coeffs["B21"], dc.n2)) + lo
    hi_piece = PowerSum.of((coeffs["B12"], dc.n1), (coeffs["B22"], dc.n2)) + hi
    return Piecewise((dc.y_tilde,), (lo_piece, hi_piece))


def pasting_residuals(dc, debt, floor, case_tag, coeffs, z_hat) -> dict:
    """Residuals of every equation of the smooth-pasting system."""
    value = build_value(dc, debt, case_tag, coeffs)
    last = value.pieces[-1]
    out = {
        "C1_boundary": last(z_hat, 1) + floor,
        "C2_boundary": last(z_hat, 2) * z_hat,
    }
    if case_tag == "Case1":
        y = dc.y_tilde
        lo_p, hi_p = value.pieces
        out["C0_kink"] = hi_p(y) - lo_p(y)
        out["C1_kink"] = hi_p(y, 1) - lo_p(y, 1)
    return out


def _full_system(dc, debt, floor, case_tag):
    """Residual vector of the full nonlinear system in (coefficients, ln z_hat)."""

    def fun(x):
        zh = math.exp(x[-1])
        if case_tag == "Case2":
            coeffs = {"B2": x[0]}
        else:
            coeffs = {"B21": x[0], "B12": x[1], "B22": x[2]}
        res = pasting_residuals(dc, debt, floor, case_tag, coeffs, zh)
        return np.array(list(res.values()))

    return fun


def _coeff_vector(case_tag, coeffs):
    keys = ("B2",) if case_tag == "Case2" else ("B21", "B12", "B22")
    return [coeffs[k] for k in keys], keys


def polish(dc, debt, floor, case_tag, coeffs, z_hat, tol=1e-12):
    """Refine a candidate with damped Newton on the full system."""
    vec, keys = _coeff_vector(case_tag, coeffs)
    x0 = np.array(vec + [math.log(z_hat)])
    x = damped_newton(_full_system(dc, debt, floor, case_tag), x0, tol=tol)
    if x is None:
        return coeffs, z_hat
    return dict(zip(keys, map(float, x[:-1]))), float(math.exp(x[-1]))


def newton_solve(dc, debt, floor, case_tag, z_guess, tol=1e-12):
    """Solve a case from a boundary guess by damped Newton (no bracketing).

    Coefficient guesses come from the linear subsystem at ``z_guess``.
    Returns ``(coeffs, z_hat)`` or ``None`` if Newton fails.
    """
    if case_tag == "Case2":
        B2, _ = _single_piece(dc, debt, floor, z_guess)
        coeffs = {"B2": B2}
    else:
        (B21, B12, B22), _ = _two_piece(dc, debt, floor, z_guess, kink_coupling(dc, debt))
        coeffs = {"B21": B21, "B12": B12, "B22": B22}
    vec, keys = _coeff_vector(case_tag, coeffs)
    x = damped_newton(_full_system(dc, debt, floor, case_tag),
                      np.array(vec + [math.log(z_guess)]), tol=tol)
    if x is None:
        return None
    return dict(zip(keys, map(float, x[:-1]))), float(math.exp(x[-1]))


def candidates(dc: DerivedConstants, debt: float, floor: float, case_tag: str):
    """All ordering-consistent solutions of one case, as (coeffs, z_hat) pairs."""
    y = dc.y_tilde
    slack = ORDER_SLACK * max(1.0, y if math.isfinite(y) else 1.0)
    out = []
    if case_tag == "Case2":
        hi = min(y, 1e12)
        roots = scan_roots(lambda z: _single_piece(dc, debt, floor, z)[1], 1e-12, hi)
        for z in roots:
            if z < y + slack:
                B2, _ = _single_piece(dc, debt, floor, z)
                out.append(({"B2": B2}, z))
    else:
        if not math.isfinite(y):
            return out
        try:
            coupling = kink_coupling(dc, debt)
        except (ZeroDivisionError, OverflowError):
            # kink beyond floating range: effectively no kink
            return out
        roots = scan_roots(lambda z: _two_piece(dc, debt, floor, z, coupling)[1],
                           y * (1.0 - 1e-9), y * 1e12)
        for z in roots:
            if z >= y - slack:
                (B21, B12, B22), _ = _two_piece(dc, debt, floor, z, coupling)
                out.append(({"B21": B21, "B12": B12, "B22": B22}, z))
    return out


def solve_reflected(dc: DerivedConstants, debt: float, floor: float, cls=ReflectedSolution,
                    cases=("Case1", "Case2")) -> ReflectedSolution:
    """Solve the reflected problem, adjudicating between the two cases.

    With no labour income there is no kink, and in the post-bankruptcy
    problem the slope never reaches zero: the value is then the pure
    particular solution with ``z_hat = inf``.
    """
    found = []
    for tag in cases:
        for coeffs, zh in candidates(dc, debt, floor, tag):
            coeffs, zh = polish(dc, debt, floor, tag, coeffs, zh)
            found.append((tag, coeffs, zh))
    if not found:
        if not math.isfinite(dc.y_tilde) and "Case2" in cases and debt == 0.0 and floor == 0.0:
            coeffs = {"B2": 0.0}
            return cls("Case2", math.inf, coeffs, dc, debt, floor,
                       build_value(dc, debt, "Case2", coeffs), {})
        raise NoCaseAdmissible("no reflected-boundary case admits a solution")
    if len(found) > 1:
        tags = {f[0] for f in found}
        if len(tags) > 1 and _near_kink(dc, found):
            found.sort(key=lambda f: _max_res(dc, debt, floor, *f))
            found = found[:1]
        else:
            raise BothCasesAdmissible(
                f"{len(found)} admissible boundaries: "
                + ", ".join(f"{t}@{z:.6g}" for t, _, z in found))
    tag, coeffs, zh = found[0]
    res = pasting_residuals(dc, debt, floor, tag, coeffs, zh)
    return cls(tag, zh, coeffs, dc, debt, floor, build_value(dc, debt, tag, coeffs), res)


def _near_kink(dc, found):
    y = dc.y_tilde
    return all(abs(z - y) <= ORDER_SLACK * max(1.0, y) * 10 for _, _, z in found)


def _max_res(dc, debt, floor, tag, coeffs, zh):
    res = pasting_residuals(dc, debt, floor, tag, coeffs, zh)
    return max(abs(v) for v in res.values())


def solve_pb(params: ModelParams, dc: DerivedConstants | None = None) -> PbSolution:
    """Solve the post-bankruptcy problem."""
    if dc is None:
        dc = derive(params)
    return solve_reflected(dc, 0.0, 0.0, cls=PbSolution)


def v_pb_eval(z: float, pb: PbSolution) -> tuple[float, float, float]:
    """``(v_PB, v_PB', v_PB'')`` at ``z``; flat beyond the boundary."""
    return pb.v(z, 0), pb.v(z, 1), pb.v(z, 2)
