# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernel for the banded pair-correlation evolution.

Storage: y[r, x] = C(x, x + r) on a ring of size L, rows r = 0..B.
The right-hand side is the moment generator (see evanescent.moments);
row r = B reads C(x, x + B + 1) as zero (band truncation).
"""

cimport cython


cdef void _rhs_rows(const double[:, ::1] y, double[:, ::1] out,
                    double lam, double gam, Py_ssize_t B,
                    Py_ssize_t L) noexcept nogil:
    cdef Py_ssize_t r, x, xp, xm
    cdef double drift, exch
    cdef double four_gam = 4.0 * gam
    # r = 0: dd(x) = 2[e(x) - e(x-1)] + lam [d(x+1) + d(x-1) - 2 d(x)]
    for x in range(L):
        xp = x + 1 if x + 1 < L else 0
        xm = x - 1 if x > 0 else L - 1
        out[0, x] = 2.0 * (y[1, x] - y[1, xm]) \
            + lam * (y[0, xp] + y[0, xm] - 2.0 * y[0, x])
    # r = 1: drift d(x+1) - o2(x-1) + o2(x) - d(x); exchange o2(x-1)+o2(x)-2*o1(x)
    for x in range(L):
        xp = x + 1 if x + 1 < L else 0
        xm = x - 1 if x > 0 else L - 1
        drift = y[0, xp] - y[2, xm] + y[2, x] - y[0, x]
        exch = y[2, xm] + y[2, x] - 2.0 * y[1, x]
        out[1, x] = drift + lam * exch - four_gam * y[1, x]
    # 2 <= r < B: full stencil with neighbor rows r-1, r+1
    for r in range(2, B):
        for x in range(L):
            xp = x + 1 if x + 1 < L else 0
            xm = x - 1 if x > 0 else L - 1
            drift = y[r - 1, xp] - y[r + 1, xm] + y[r + 1, x] - y[r - 1, x]
            exch = y[r - 1, xp] + y[r + 1, xm] + y[r + 1, x] + y[r - 1, x] \
                - 4.0 * y[r, x]
            out[r, x] = drift + lam * exch - four_gam * y[r, x]
    # r = B: row B+1 truncated to zero
    for x in range(L):
        xp = x + 1 if x + 1 < L else 0
        drift = y[B - 1, xp] - y[B - 1, x]
        exch = y[B - 1, xp] + y[B - 1, x] - 4.0 * y[B, x]
        out[B, x] = drift + lam * exch - four_gam * y[B, x]


def band_rhs(double[:, ::1] y, double[:, ::1] out, double lam, double gam):
    """out <- generator applied to banded state y (rows 0..B)."""
    cdef Py_ssize_t B = y.shape[0] - 1
    cdef Py_ssize_t L = y.shape[1]
    if B < 2:
        raise ValueError("band needs at least rows 0..2")
    with nogil:
        _rhs_rows(y, out, lam, gam, B, L)


def rk4_step(double[:, ::1] y, double[:, ::1] acc, double[:, ::1] k,
             double[:, ::1] tmp, double dt, double lam, double gam):
    """One classic 4th-order step in place on y; acc/k/tmp are work buffers."""
    cdef Py_ssize_t B = y.shape[0] - 1
    cdef Py_ssize_t L = y.shape[1]
    cdef Py_ssize_t i, ntot = (B + 1) * L
    cdef double sixth = dt / 6.0, third = dt / 3.0, half = dt / 2.0
    cdef double *py
    cdef double *pacc
    cdef double *pk
    cdef double *ptmp
    if B < 2:
        raise ValueError("band needs at least rows 0..2")
    with nogil:
        py = &y[0, 0]
        pacc = &acc[0, 0]
        pk = &k[0, 0]
        ptmp = &tmp[0, 0]
        _rhs_rows(y, k, lam, gam, B, L)                     # k1
        for i in range(ntot):
            pacc[i] = py[i] + sixth * pk[i]
            ptmp[i] = py[i] + half * pk[i]
        _rhs_rows(tmp, k, lam, gam, B, L)                   # k2
        for i in range(ntot):
            pacc[i] = pacc[i] + third * pk[i]
            ptmp[i] = py[i] + half * pk[i]
        _rhs_rows(tmp, k, lam, gam, B, L)                   # k3
        for i in range(ntot):
            pacc[i] = pacc[i] + third * pk[i]
            ptmp[i] = py[i] + dt * pk[i]
        _rhs_rows(tmp, k, lam, gam, B, L)                   # k4
        for i in range(ntot):
            py[i] = pacc[i] + sixth * pk[i]
