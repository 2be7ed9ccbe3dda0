"""Convex dual of the Cobb-Douglas utility and of the post-bankruptcy value.

The dual utility is ``u~(y) = sup_{c>0, 0<l<=L} u(c, l) - (c + w l) y``.
Below the kink ``y_tilde`` the leisure cap binds (``l = L``); above it the
unconstrained first-order conditions hold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._powers import PowerSum
from .errors import DomainError
from .model import DerivedConstants, ModelParams


@dataclass(frozen=True)
class DualUtilityEval:
    y: float
    u_tilde: float
    c_hat: float
    l_hat: float
    branch: str  # "below_kink" | "at_or_above_kink"


def utility(c, l, params: ModelParams):
    """Cobb-Douglas power utility ``(c**delta * l**(1-delta))**(1-k) / (delta (1-k))``."""
    p = params
    bundle = np.power(c, p.delta) * np.power(l, 1.0 - p.delta)
    return np.power(bundle, 1.0 - p.k) / (p.delta * (1.0 - p.k))


def dual_pieces(dc: DerivedConstants) -> tuple[PowerSum, PowerSum]:
    """The two power-sum pieces of ``u~`` (below and above the kink)."""
    p = dc.params
    lo = PowerSum.of((dc.A1, dc.beta1), (-p.w * p.L, 1.0))
    hi = PowerSum.of((dc.A2, dc.beta2))
    return lo, hi


def _check_positive(y):
    if np.any(~(np.asarray(y) > 0.0)):
        raise DomainError("dual variable must be positive")


def u_tilde_deriv(y, dc: DerivedConstants, m: int = 0):
    """``m``-th derivative of ``u~`` at ``y`` (scalar or array)."""
    _check_positive(y)
    lo, hi = dual_pieces(dc)
    if np.ndim(y) == 0:
        return lo(y, m) if y < dc.y_tilde else hi(y, m)
    y = np.asarray(y, dtype=float)
    below = y < dc.y_tilde
    out = np.empty_like(y)
    out[below] = lo(y[below], m)
    out[~below] = hi(y[~below], m)
    return out


def consumption_leisure(y, dc: DerivedConstants):
    """Maximising consumption and leisure ``(c_hat(y), l_hat(y))``."""
    _check_positive(y)
    p = dc.params
    if np.ndim(y) == 0:
        if y < dc.y_tilde:
            return dc.c_lo * y ** (dc.beta1 - 1.0), p.L
        s = y ** (-1.0 / p.k)
        return dc.c_hi * s, dc.l_hi * s
    y = np.asarray(y, dtype=float)
    below = y < dc.y_tilde
    s = np.power(y, -1.0 / p.k)
    c = np.where(below, dc.c_lo * np.power(y, dc.beta1 - 1.0), dc.c_hi * s)
    l = np.where(below, p.L, dc.l_hi * s)
    return c, l


def u_tilde(y: float, dc: DerivedConstants, params: ModelParams | None = None) -> DualUtilityEval:
    """Evaluate ``u~`` and its argmax at a positive dual value ``y``."""
    y = float(y)
    c, l = consumption_leisure(y, dc)
    branch = "below_kink" if y < dc.y_tilde else "at_or_above_kink"
    return DualUtilityEval(y, u_tilde_deriv(y, dc), c, l, branch)


def U_tilde(z, pb, params: ModelParams | None = None, m: int | None = None):
    """Dual of the post-bankruptcy value net of the toll: ``v_PB(z/alpha) - F z``.

    Beyond ``alpha * z_hat_pb`` the post-bankruptcy value is flat, so there
    ``U~(z) = v_PB(z_hat_pb) - F z``.

    Returns ``(U~, U~', U~'')`` or, if ``m`` is given, only the ``m``-th
    derivative.
    """
    _check_positive(z)
    a = pb.dc.params.alpha
    F = pb.dc.params.F

    def deriv(j):
        val = pb.v(np.asarray(z) / a if np.ndim(z) else z / a, j) * a ** (-j)
        if j == 0:
            return val - F * z
        if j == 1:
            return val - F
        return val

    if m is not None:
        return deriv(m)
    return deriv(0), deriv(1), deriv(2)
