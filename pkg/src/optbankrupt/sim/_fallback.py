"""Pure numpy versions of the compiled kernels, same signatures and streams."""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
INV_2_53 = 1.0 / 9007199254740992.0


def _mix(z):
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _key(seed, stream):
    with np.errstate(over="ignore"):
        return _mix(np.uint64(seed) ^ (GOLDEN * (np.asarray(stream, dtype=np.uint64) + np.uint64(1))))


def _uniform(key, j):
    with np.errstate(over="ignore"):
        bits = _mix(key + GOLDEN * (np.asarray(j, dtype=np.uint64) + np.uint64(1)))
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * INV_2_53


def _normals(key, j):
    """Normal number ``j`` (array) for stream keys ``key`` (broadcast)."""
    j = np.asarray(j, dtype=np.uint64)
    m2 = (j >> np.uint64(1)) << np.uint64(1)
    rad = np.sqrt(-2.0 * np.log(_uniform(key, m2)))
    ang = 2.0 * np.pi * _uniform(key, m2 + np.uint64(1))
    return np.where((j & np.uint64(1)) == 1, rad * np.sin(ang), rad * np.cos(ang))


def fill_normals(seed, stream, start, out):
    key = _key(seed, stream)
    j = np.uint64(start) + np.arange(out.shape[0], dtype=np.uint64)
    out[:] = _normals(key, j)


def reflected_walk(incr, start, cap, out):
    # discrete Skorokhod map: subtract the running maximum overshoot
    s = np.empty(incr.shape[0] + 1)
    s[0] = min(start, cap)
    np.cumsum(incr, out=s[1:])
    s[1:] += s[0]
    push = np.maximum.accumulate(np.maximum(s - cap, 0.0))
    out[:] = s - push


def budget_paths(seed, first_path, logz0, log_cap, log_stop, dt, max_steps,
                 drift_z, drift_h, vol, log_kink, a_lo, e_lo, b_lo, a_hi, e_hi, b_hi,
                 acc, logz_out, logh_out, steps_out):
    n_paths = acc.shape[0]
    keys = _key(seed, np.uint64(first_path) + np.arange(n_paths, dtype=np.uint64))
    lz = np.full(n_paths, min(logz0, log_cap))
    lh = np.zeros(n_paths)
    total = np.zeros(n_paths)
    steps = np.zeros(n_paths, dtype=np.int64)
    live = np.flatnonzero(lz < log_stop)
    n = 0
    while n < max_steps and live.size:
        z = lz[live]
        below = z < log_kink
        spend = np.where(below, a_lo * np.exp(e_lo * z) + b_lo, a_hi * np.exp(e_hi * z) + b_hi)
        total[live] += np.exp(lh[live]) * spend * dt
        xi = _normals(keys[live], n)
        z = np.minimum(z + drift_z + vol * xi, log_cap)
        lz[live] = z
        lh[live] += drift_h + vol * xi
        n += 1
        steps[live] = n
        live = live[z < log_stop]
    acc[:] = total
    logz_out[:] = lz
    logh_out[:] = lh
    steps_out[:] = steps
