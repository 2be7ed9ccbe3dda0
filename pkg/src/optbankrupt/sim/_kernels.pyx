# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops of the path simulator.

The random numbers are counter based: normal number ``j`` of stream ``s``
depends only on ``(seed, s, j)``, so paths can be generated in any order.
"""

from libc.math cimport cos, exp, log, sin, sqrt
from libc.stdint cimport uint64_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TWO_PI = 6.283185307179586
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _key(uint64_t seed, uint64_t stream) noexcept nogil:
    return _mix(seed ^ (GOLDEN * (stream + 1)))


cdef inline double _uniform(uint64_t key, uint64_t j) noexcept nogil:
    return ((_mix(key + GOLDEN * (j + 1)) >> 11) + 0.5) * INV_2_53


cdef inline double _normal(uint64_t key, uint64_t j) noexcept nogil:
    # Box-Muller on the pair (2m, 2m+1); even j takes the cosine leg
    cdef uint64_t m = j >> 1
    cdef double rad = sqrt(-2.0 * log(_uniform(key, 2 * m)))
    cdef double ang = TWO_PI * _uniform(key, 2 * m + 1)
    if j & 1:
        return rad * sin(ang)
    return rad * cos(ang)


def fill_normals(uint64_t seed, uint64_t stream, uint64_t start, double[::1] out):
    """Standard normals ``start, start+1, ...`` of one stream."""
    cdef uint64_t key = _key(seed, stream)
    cdef Py_ssize_t i, n = out.shape[0]
    cdef uint64_t j
    cdef double rad, ang
    with nogil:
        i = 0
        while i < n:
            j = start + i
            if (j & 1) == 0 and i + 1 < n:
                rad = sqrt(-2.0 * log(_uniform(key, j)))
                ang = TWO_PI * _uniform(key, j + 1)
                out[i] = rad * cos(ang)
                out[i + 1] = rad * sin(ang)
                i += 2
            else:
                out[i] = _normal(key, j)
                i += 1


def reflected_walk(double[::1] incr, double start, double cap, double[::1] out):
    """``out[0] = start``, ``out[i+1] = min(out[i] + incr[i], cap)``."""
    cdef Py_ssize_t i, n = incr.shape[0]
    cdef double s = start if start < cap else cap
    with nogil:
        out[0] = s
        for i in range(n):
            s = s + incr[i]
            if s > cap:
                s = cap
            out[i + 1] = s


def budget_paths(uint64_t seed, uint64_t first_path,
                 double logz0, double log_cap, double log_stop,
                 double dt, long max_steps, double drift_z, double drift_h, double vol,
                 double log_kink, double a_lo, double e_lo, double b_lo,
                 double a_hi, double e_hi, double b_hi,
                 double[::1] acc, double[::1] logz_out, double[::1] logh_out,
                 long[::1] steps_out):
    """Discounted spending of each path up to its first monitored stop.

    Spending per unit time is ``a Z**e + b`` with the coefficients of the
    piece below or above ``exp(log_kink)``. Each path runs until
    ``log Z >= log_stop`` at a grid time or until ``max_steps``; the stop
    state ``(log Z, log H, step)`` is written out for the terminal term.
    """
    cdef Py_ssize_t p, n_paths = acc.shape[0]
    cdef long n
    cdef uint64_t key
    cdef double lz, lh, total, spend, xi, rad, ang, spare = 0.0
    with nogil:
        for p in range(n_paths):
            key = _key(seed, first_path + p)
            lz = logz0 if logz0 < log_cap else log_cap
            lh = 0.0
            total = 0.0
            n = 0
            while n < max_steps and lz < log_stop:
                if lz < log_kink:
                    spend = a_lo * exp(e_lo * lz) + b_lo
                else:
                    spend = a_hi * exp(e_hi * lz) + b_hi
                total += exp(lh) * spend * dt
                if n & 1:
                    xi = spare
                else:
                    rad = sqrt(-2.0 * log(_uniform(key, n)))
                    ang = TWO_PI * _uniform(key, n + 1)
                    xi = rad * cos(ang)
                    spare = rad * sin(ang)
                lz += drift_z + vol * xi
                if lz > log_cap:
                    lz = log_cap
                lh += drift_h + vol * xi
                n += 1
            acc[p] = total
            logz_out[p] = lz
            logh_out[p] = lh
            steps_out[p] = n
