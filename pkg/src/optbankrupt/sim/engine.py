"""Monte Carlo paths of the optimal dual process, wealth and controls.

The dual process ``Z(t) = lambda e^{gamma t} H(t)`` is a geometric Brownian
motion with ``dZ/Z = (gamma - r) dt - theta dB`` and is stepped exactly in
log space. ``H(t) = exp(-(r + theta^2/2) t - theta B(t))`` shares the same
increments. Before bankruptcy ``Z`` is projected onto ``(0, z_hat]`` when
the liquidity constraint can bind; bankruptcy happens the first time
``Z >= z_bar``. Afterwards the post-bankruptcy dual ``Z_PB`` follows the
same noise and is projected onto ``(0, z_hat_pb]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dual import consumption_leisure
from ..errors import ConfigError, OutOfRange
from ..policy import REGIME_STOP, PolicyMaps, _solve_wealth, dual_root, policy_maps
from ..primal import PrimalSolution
from . import backend


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    horizon: float = 50.0
    n_paths: int = 1
    seed: int = 0
    scheme: str = "euler_log"

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ConfigError(f"n_paths must be a positive integer, got {self.n_paths}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must fit in 64 unsigned bits")
        if self.scheme != "euler_log":
            raise ConfigError(f"unknown scheme {self.scheme!r}")

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.horizon / self.dt - 1e-9))


@dataclass
class PathRecord:
    times: np.ndarray
    z_path: np.ndarray  # pre-bankruptcy Z, then Z_PB
    x_path: np.ndarray
    c_path: np.ndarray
    l_path: np.ndarray
    pi_path: np.ndarray
    h_path: np.ndarray  # state-price density H(t)
    post: np.ndarray  # bool, True from the first grid time after bankruptcy
    tau: float | None
    jump: tuple[float, float] | None  # (X(tau), X(tau+))
    stop_index: int | None  # first grid index with Z >= z_bar

    def rows(self):
        for i in range(self.times.size):
            yield (self.times[i], self.z_path[i], self.x_path[i], self.c_path[i],
                   self.l_path[i], self.pi_path[i], "post" if self.post[i] else "pre")


# --- vectorised policy maps --------------------------------------------------

def pre_controls(z, sol: PrimalSolution):
    """``(c, l, pi, X)`` on the continuation piece (arrays)."""
    p = sol.params
    c, l = consumption_leisure(z, sol.dc)
    pi = sol.dc.theta / p.sigma * z * sol.value(z, 2)
    return c, l, pi, -sol.value(z, 1)


def post_controls_vec(zp, sol: PrimalSolution):
    pb = sol.pb
    p = sol.params
    zp = np.minimum(zp, pb.z_hat)
    c, l = consumption_leisure(zp, pb.dc)
    pi = pb.dc.theta / p.sigma * zp * pb.v(zp, 2)
    return c, l, pi, -pb.v(zp, 1)


def _log_steps(sol: PrimalSolution, dt: float) -> tuple[float, float, float]:
    """Per-step drifts of ``log Z`` and ``log H`` and the noise scale."""
    p = sol.params
    th = sol.dc.theta
    return (p.gamma - p.r - 0.5 * th * th) * dt, -(p.r + 0.5 * th * th) * dt, th * math.sqrt(dt)


def _pre_cap(sol: PrimalSolution) -> float:
    if sol.regime == REGIME_STOP or not math.isfinite(sol.z_hat):
        return math.inf
    return math.log(sol.z_hat)


def post_dual(x_tau: float, sol: PrimalSolution) -> float:
    """``Z_PB(tau+)`` solving ``alpha (x_tau - F) = -v_PB'(Z_PB)``."""
    p = sol.params
    pb = sol.pb
    target = p.alpha * (x_tau - p.F)
    if not target >= 0:
        raise OutOfRange("post-bankruptcy wealth would be negative")
    z_top = pb.z_hat if math.isfinite(pb.z_hat) else 1e12
    return _solve_wealth(lambda z: -pb.v(z, 1), target, z_top)


def simulate_path(sol: PrimalSolution, pol: PolicyMaps, cfg: SimConfig, index: int) -> PathRecord:
    p = sol.params
    n = cfg.n_steps
    dt = cfg.dt
    mz, mh, vol = _log_steps(sol, dt)
    xi = np.empty(n)
    backend.kernels.fill_normals(cfg.seed, index, 0, xi)
    times = np.arange(n + 1) * dt
    lh = np.empty(n + 1)
    lh[0] = 0.0
    np.cumsum(mh + vol * xi, out=lh[1:])

    log_bar = math.log(sol.z_bar)
    lz = np.empty(n + 1)
    z0 = pol.z0
    backend.kernels.reflected_walk(mz + vol * xi, math.log(z0), _pre_cap(sol), lz)

    stop = None
    tau = None
    jump = None
    if sol.regime == REGIME_STOP:
        if pol.immediate_bankruptcy:
            stop, tau = 0, 0.0
            x_tau = pol.x0
        else:
            hits = np.flatnonzero(lz >= log_bar)
            if hits.size:
                stop = int(hits[0])
                if stop == 0:
                    tau = 0.0
                else:
                    a, b = lz[stop - 1], lz[stop]
                    tau = times[stop - 1] + dt * (log_bar - a) / (b - a)
                x_tau = pol.x_bar
    zr = np.exp(lz)
    post = np.zeros(n + 1, dtype=bool)
    c = np.empty(n + 1)
    l = np.empty(n + 1)
    pi = np.empty(n + 1)
    x = np.empty(n + 1)
    m = n + 1 if stop is None else stop
    c[:m], l[:m], pi[:m], x[:m] = pre_controls(zr[:m], sol)
    if stop is not None:
        zpb0 = post_dual(x_tau, sol)
        jump = (x_tau, p.alpha * (x_tau - p.F))
        # the post dual rides the same noise: Z_PB(t) = Z_PB(tau+) Z(t) / Z(tau)
        lz_tau = log_bar if stop > 0 or not pol.immediate_bankruptcy else math.log(z0)
        lpb = np.empty(n + 1 - stop)
        cap = math.log(sol.pb.z_hat) if math.isfinite(sol.pb.z_hat) else math.inf
        start = math.log(zpb0) + (lz[stop] - lz_tau)
        backend.kernels.reflected_walk(mz + vol * xi[stop:], start, cap, lpb)
        zr[stop:] = np.exp(lpb)
        post[stop:] = True
        c[stop:], l[stop:], pi[stop:], x[stop:] = post_controls_vec(zr[stop:], sol)
    return PathRecord(times, zr, x, c, l, pi, np.exp(lh), post, tau, jump, stop)


def simulate(sol: PrimalSolution, pol: PolicyMaps | None, cfg: SimConfig) -> list[PathRecord]:
    """Simulate ``cfg.n_paths`` optimal paths; path ``i`` uses RNG stream ``i``."""
    pol = policy_maps(sol) if pol is None else pol
    if not pol.x0 >= sol.floor:
        raise OutOfRange(f"initial wealth {pol.x0} is below F + eta")
    return [simulate_path(sol, pol, cfg, i) for i in range(cfg.n_paths)]


# --- budget identity ---------------------------------------------------------

@dataclass(frozen=True)
class BudgetEstimate:
    estimate: float  # E[ int_0^tau H (c + d + w l - w L_bar) dt + H(tau) X(tau) ] - x0
    se: float
    n_paths: int
    tail_fraction: float  # paths not stopped within the horizon
    backend: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def budget_contributions(sol: PrimalSolution, cfg: SimConfig, x0: float | None = None,
                         c_scale: float = 1.0, first_path: int = 0) -> tuple[np.ndarray, int]:
    """Per-path values of ``int_0^T H(...) dt + H(T) X(T)`` with ``T = tau ^ horizon``.

    ``T`` is the first grid time with ``Z >= z_bar`` (or the horizon). The
    terminal wealth is ``-v'(Z(T))`` from the continuation formula, which
    makes the sum a martingale evaluated at a bona fide stopping time.
    """
    p = sol.params
    dc = sol.dc
    x0 = p.x0 if x0 is None else x0
    z0 = dual_root(x0, sol)
    n_paths = cfg.n_paths
    if sol.regime == REGIME_STOP and z0 >= sol.z_bar:
        return np.full(n_paths, float(x0)), 0
    mz, mh, vol = _log_steps(sol, cfg.dt)
    const = p.d - p.w * p.L_bar
    lo = (c_scale * dc.c_lo, dc.beta1 - 1.0, p.w * p.L + const)
    # above the kink c and l share the exponent -1/k
    hi = (c_scale * dc.c_hi + p.w * dc.l_hi, -1.0 / p.k, const)
    log_kink = math.log(dc.y_tilde) if math.isfinite(dc.y_tilde) else math.inf
    log_stop = math.log(sol.z_bar) if sol.regime == REGIME_STOP else math.inf
    acc = np.empty(n_paths)
    lz = np.empty(n_paths)
    lh = np.empty(n_paths)
    steps = np.empty(n_paths, dtype=np.int64)
    backend.kernels.budget_paths(
        cfg.seed, first_path, math.log(z0), _pre_cap(sol), log_stop,
        cfg.dt, cfg.n_steps, mz, mh, vol, log_kink, *lo, *hi, acc, lz, lh, steps)
    terminal = np.exp(lh) * -sol.value(np.exp(lz), 1)
    tail = int(np.count_nonzero(lz < log_stop))
    return acc + terminal, tail


def budget_check(sol: PrimalSolution, cfg: SimConfig, x0: float | None = None,
                 c_scale: float = 1.0) -> BudgetEstimate:
    """Monte Carlo estimate and standard error of the budget identity gap.

    At the optimum the expected discounted spending until bankruptcy plus the
    discounted wealth at bankruptcy equals the initial wealth, so the
    estimate is zero up to sampling error. ``c_scale`` inflates consumption
    to probe a sub-optimal policy.
    """
    x0 = sol.params.x0 if x0 is None else x0
    vals, tail = budget_contributions(sol, cfg, x0, c_scale)
    n = vals.size
    se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return BudgetEstimate(float(vals.mean() - x0), se, n, tail / n, backend.NAME)


def budget_check_paths(paths: list[PathRecord], sol: PrimalSolution, x0: float) -> BudgetEstimate:
    """Budget identity from stored paths (left-point sums up to the stop index)."""
    p = sol.params
    vals = []
    tail = 0
    for rec in paths:
        dt = rec.times[1] - rec.times[0]
        m = rec.stop_index if rec.stop_index is not None else rec.times.size - 1
        if rec.stop_index == 0:
            vals.append(rec.jump[0])
            continue
        if rec.stop_index is None:
            tail += 1
        spend = rec.c_path[:m] + p.d + p.w * rec.l_path[:m] - p.w * p.L_bar
        total = float(np.sum(rec.h_path[:m] * spend) * dt)
        zt = rec.z_path[m] if rec.stop_index is None else _pre_z(rec, sol)
        vals.append(total + rec.h_path[m] * -sol.value(zt, 1))
    vals = np.asarray(vals)
    n = vals.size
    se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return BudgetEstimate(float(vals.mean() - x0), se, n, tail / n, backend.NAME)


def _pre_z(rec: PathRecord, sol: PrimalSolution) -> float:
    # pre-bankruptcy Z at the stop index, recovered from the post dual
    i = rec.stop_index
    zp0 = post_dual(rec.jump[0], sol)
    return float(rec.z_path[i] * sol.z_bar / zp0)


# --- pathwise wealth consistency ---------------------------------------------

def wealth_gap(sol: PrimalSolution, x0: float, dt: float, horizon: float, n_paths: int,
               seed: int = 0, refine: int = 1) -> float:
    """Max gap between Milstein-integrated wealth and ``-v'(Z)`` before bankruptcy.

    The Brownian path is drawn on the grid ``dt / refine`` from stream
    ``i``'s normals at step ``dt``: each coarse normal is split into
    ``refine`` fine increments with a Brownian bridge, so runs with
    different ``refine`` share one Brownian path.
    """
    p = sol.params
    th = sol.dc.theta
    z0 = dual_root(x0, sol)
    n = int(round(horizon / dt))
    h = dt / refine
    log_bar = math.log(sol.z_bar) if sol.regime == REGIME_STOP else math.inf
    cap = _pre_cap(sol)
    worst = 0.0
    for i in range(n_paths):
        dw = _bridge_increments(seed, i, n, dt, refine)
        lz = np.empty(dw.size + 1)
        backend.kernels.reflected_walk((p.gamma - p.r - 0.5 * th * th) * h - th * dw,
                                       math.log(z0), cap, lz)
        hits = np.flatnonzero(lz >= log_bar)
        m = int(hits[0]) if hits.size else lz.size
        z = np.exp(lz[:m])
        c, l, pi, x_true = pre_controls(z, sol)
        v2 = sol.value(z, 2)
        v3 = sol.value(z, 3)
        dpi = th / p.sigma * (z * v2 + z * z * v3)  # d pi / d log Z
        dwm = dw[:m - 1]
        drift = pi[:-1] * (p.mu - p.r) - c[:-1] - p.d + p.w * (p.L_bar - l[:-1])
        diff = p.sigma * pi[:-1] * dwm
        # Milstein term: d(sigma pi) = sigma dpi (-theta dB) + O(dt)
        mil = -0.5 * p.sigma * th * dpi[:-1] * (dwm * dwm - h)
        b = (drift * h + diff + mil)
        q = 1.0 + p.r * h
        # X_{k+1} = q X_k + b_k, solved in closed form
        qk = q ** np.arange(m)
        x = qk * (x0 + np.concatenate(([0.0], np.cumsum(b / qk[1:]))))
        worst = max(worst, float(np.max(np.abs(x - x_true))))
    return worst


def _bridge_increments(seed: int, stream: int, n: int, dt: float, refine: int) -> np.ndarray:
    xi = np.empty(n)
    backend.kernels.fill_normals(seed, stream, 0, xi)
    dw = xi * math.sqrt(dt)
    if refine == 1:
        return dw
    # extra normals for the bridge come from a shifted counter range
    extra = np.empty(n * (refine - 1))
    backend.kernels.fill_normals(seed, stream, 1 << 40, extra)
    extra = extra.reshape(n, refine - 1)
    out = np.empty((n, refine))
    rest = dw.copy()
    left = dt
    h = dt / refine
    for j in range(refine - 1):
        # conditional law of the next fine increment given the remaining sum
        mean = rest * h / left
        var = h * (left - h) / left
        out[:, j] = mean + math.sqrt(var) * extra[:, j]
        rest = rest - out[:, j]
        left -= h
    out[:, -1] = rest
    return out.ravel()
