"""Scalar root bracketing and a small damped Newton solver."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq


def scan_roots(f, lo: float, hi: float, per_decade: int = 40) -> list[float]:
    """All sign changes of ``f`` on a log grid over ``[lo, hi]``, refined by Brent."""
    if not hi > lo > 0.0:
        return []
    n = max(8, int(per_decade * math.log10(hi / lo)) + 1)
    grid = np.geomspace(lo, hi, n)
    vals = []
    for z in grid:
        try:
            v = f(float(z))
        except (ZeroDivisionError, OverflowError, ValueError):
            v = math.nan
        vals.append(v)
    roots = []
    for i in range(n - 1):
        a, b = vals[i], vals[i + 1]
        if not (math.isfinite(a) and math.isfinite(b)):
            continue
        if a == 0.0:
            roots.append(float(grid[i]))
        elif a * b < 0.0:
            roots.append(brentq(f, grid[i], grid[i + 1], xtol=1e-300, rtol=4 * np.finfo(float).eps,
                                maxiter=500))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def damped_newton(fun, x0, tol: float = 1e-12, maxiter: int = 200):
    """Damped Newton with a central-difference Jacobian.

    Returns the solution vector, or ``None`` when the iteration stalls
    above ``tol`` (max-abs residual).
    """
    x = np.asarray(x0, dtype=float).copy()
    fx = fun(x)
    norm = np.max(np.abs(fx))
    for _ in range(maxiter):
        if norm <= tol:
            return x
        jac = np.empty((fx.size, x.size))
        for j in range(x.size):
            h = 1e-7 * max(1.0, abs(x[j]))
            e = np.zeros_like(x)
            e[j] = h
            jac[:, j] = (fun(x + e) - fun(x - e)) / (2 * h)
        try:
            step = np.linalg.solve(jac, -fx)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, -fx, rcond=None)[0]
        t = 1.0
        while t > 1e-10:
            xn = x + t * step
            with np.errstate(all="ignore"):
                fn = fun(xn)
            nn = np.max(np.abs(fn))
            if np.isfinite(nn) and nn < norm:
                break
            t *= 0.5
        else:
            return x if norm <= tol * 1e3 else None
        x, fx, norm = xn, fn, nn
    return x if norm <= tol else None
