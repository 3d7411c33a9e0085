"""Closed evolution of first and second moments of the random linear flow.

The generator preserves polynomial degree, so C(x,y,t) = E[v_x v_y] with
v(0) = e_0 obeys a closed linear ODE on symmetric ring matrices:

  drift     dC(x,y) += C(x+1,y) - C(x-1,y) + C(x,y+1) - C(x,y-1)
  flip      dC(x,y) += -4 gamma_n C(x,y)                      for x != y only
  exchange  dC(x,y) += lambda * [2-D ring Laplacian of C]     for |x-y| >= 2
            dC(x,x)   += lambda * [C(x+1,x+1)+C(x-1,x-1)-2C(x,x)]
            dC(x,x+1) += lambda * [C(x-1,x+1)+C(x,x+2)-2C(x,x+1)]

(the exchange rows on the tridiagonal band are NOT the 2-D Laplacian; the
difference is the near-diagonal correction produced by the shared bond).
The trace sum_x C(x,x) is conserved exactly by every part.

Correlation kernels:
  S(z) = 2 beta^{-2} C(z,z,T)   (energy),   V(z) = beta^{-1} m_z(T)  (volume),
with m the first moment obeying dm = (shift - shift*) m - 2 gamma_n m
+ lambda Laplacian m.

Two engines evolve C: a dense reference engine (full L x L matrix, used for
small rings and validation) and a banded engine storing the diagonals
C(x, x+r), 0 <= r <= B, whose right-hand side is evaluated by the compiled
kernel in evanescent._band_kernel (pure-numpy fallback: _band_fallback).
Entries beyond the band are exponentially small, localization rate
~ sqrt(2 gamma_n / lambda + pi / L); the band width rule is validated by a
doubling test.

Time stepping is the classic explicit 4th-order one-step scheme with
dt <= 0.5 / (1 + 4 lambda + 4 gamma_n).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._core import BACKEND, band_rhs, rk4_step  # noqa: F401
from .chain import ModelParams, check_finite_size

DENSE_MAX_L = 256
BAND_RATE_CONSTANT = 16.0
TRACE_DRIFT_ABORT = 1e-6


class InstabilityError(RuntimeError):
    """Time integration left the stability region (trace drift above gate)."""


@dataclass
class PairCorrelation:
    L: int
    C: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if self.C.shape != (self.L, self.L):
            raise ValueError("C must be L x L")

    def trace(self) -> float:
        return float(np.trace(self.C))

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.C - self.C.T)))


@dataclass
class FirstMoment:
    L: int
    m: np.ndarray
    time: float = 0.0


def stable_dt(params: ModelParams) -> float:
    return 0.5 / (1.0 + 4.0 * params.lam + 4.0 * params.gamma_n())


def flow_pair_correlation(L: int) -> PairCorrelation:
    """Initial pair correlation of the flow column: C = e_0 e_0^T."""
    C = np.zeros((L, L))
    C[0, 0] = 1.0
    return PairCorrelation(L=L, C=C)


# ---------------------------------------------------------------------------
# dense engine


def pair_rhs_dense(C: np.ndarray, lam: float, gam: float) -> np.ndarray:
    """Generator applied to a dense symmetric ring matrix."""
    up = np.roll(C, -1, axis=0)     # C(x+1, y)
    dn = np.roll(C, 1, axis=0)      # C(x-1, y)
    lf = np.roll(C, -1, axis=1)     # C(x, y+1)
    rt = np.roll(C, 1, axis=1)      # C(x, y-1)
    out = (up - dn + lf - rt) + lam * (up + dn + lf + rt - 4.0 * C)
    # flip damps strictly off-diagonal entries
    d = np.diagonal(C).copy()
    out -= 4.0 * gam * C
    idx = np.arange(C.shape[0])
    out[idx, idx] += 4.0 * gam * d
    # exchange corrections on the tridiagonal band (shared-bond terms)
    dp = np.roll(d, -1)             # d(x+1)
    dm = np.roll(d, 1)              # d(x-1)
    e = C[idx, (idx + 1) % C.shape[0]]
    out[idx, idx] += lam * (dp + dm - 2.0 * d - (2.0 * e + 2.0 * np.roll(e, 1) - 4.0 * d))
    corr1 = lam * (2.0 * e - d - dp)
    out[idx, (idx + 1) % C.shape[0]] += corr1
    out[(idx + 1) % C.shape[0], idx] += corr1
    return out


def build_pair_generator(params: ModelParams, L: int):
    """Matrix-free linear operator C -> dC/dt on dense symmetric matrices."""
    if L < 4:
        raise ValueError("ring size must be >= 4")
    lam, gam = params.lam, params.gamma_n()

    def apply(C: np.ndarray) -> np.ndarray:
        return pair_rhs_dense(np.asarray(C, dtype=float), lam, gam)

    return apply


def pair_generator_matrix(params: ModelParams, L: int) -> np.ndarray:
    """Dense matrix of the pair generator on the basis of unit matrix entries.

    Row/column index is x * L + y.  Used by the enumeration cross-check and
    small-system spectra; O(L^4) storage, keep L tiny.
    """
    G = build_pair_generator(params, L)
    M = np.zeros((L * L, L * L))
    for x in range(L):
        for y in range(L):
            E = np.zeros((L, L))
            E[x, y] = 1.0
            E[y, x] = 1.0
            M[:, x * L + y] = G(E).reshape(-1)
    return M


def enumerate_generator_rows(params: ModelParams, L: int) -> np.ndarray:
    """Brute-force generator on monomials v_x v_y, by direct event application.

    For each basis monomial, sums the drift product rule plus the finite
    differences f(flip_z v) - f(v) and f(swap_z v) - f(v) over all sites and
    bonds, expressing the result in the same monomial basis.  Independent of
    the stencil route; used to validate pair_rhs_dense exactly.
    """
    lam, gam = params.lam, params.gamma_n()
    M = np.zeros((L * L, L * L))

    def add(row, x, y, coeff):
        row[x % L * L + y % L] += coeff / 2.0
        row[y % L * L + x % L] += coeff / 2.0

    for x in range(L):
        for y in range(L):
            row = np.zeros(L * L)
            # drift: d(v_x v_y) = (v_{x+1}-v_{x-1}) v_y + v_x (v_{y+1}-v_{y-1})
            add(row, x + 1, y, 1.0)
            add(row, x - 1, y, -1.0)
            add(row, x, y + 1, 1.0)
            add(row, x, y - 1, -1.0)
            # flip at site z: monomial changes sign once per factor equal to z
            for z in range(L):
                sign = (-1) ** ((z == x) + (z == y))
                if sign != 1:
                    add(row, x, y, gam * (sign - 1.0))
            # exchange at bond (z, z+1): substitute swapped indices
            for z in range(L):
                zp = (z + 1) % L
                sx = zp if x == z else (z if x == zp else x)
                sy = zp if y == z else (z if y == zp else y)
                if (sx, sy) != (x, y):
                    add(row, sx, sy, lam)
                    add(row, x, y, -lam)
            M[x * L + y, :] = row
    return M


def evolve_pair(C0: PairCorrelation, params: ModelParams, T: float,
                dt: float | None = None) -> PairCorrelation:
    """Dense 4th-order evolution of the pair correlation to time T."""
    if dt is None:
        dt = stable_dt(params)
    if dt > stable_dt(params) * (1 + 1e-12):
        raise ValueError(f"dt={dt:g} above stability bound {stable_dt(params):g}")
    if T < 0:
        raise ValueError("T must be >= 0")
    G = build_pair_generator(params, C0.L)
    C = C0.C.copy()
    trace0 = float(np.trace(C))
    t = 0.0
    while t < T - 1e-15:
        h = min(dt, T - t)
        k1 = G(C)
        k2 = G(C + 0.5 * h * k1)
        k3 = G(C + 0.5 * h * k2)
        k4 = G(C + h * k3)
        C += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        if abs(np.trace(C) - trace0) > TRACE_DRIFT_ABORT * max(1.0, abs(trace0)):
            raise InstabilityError(
                f"trace drift {np.trace(C) - trace0:.3e} at t={t:.4g} "
                f"(dt={h:g}, L={C0.L})")
    return PairCorrelation(L=C0.L, C=C, time=C0.time + T)


# ---------------------------------------------------------------------------
# banded engine


def band_width(params: ModelParams, L: int) -> int:
    """Half-bandwidth rule: correlations localize at rate
    ~ sqrt(2 gamma/lambda + pi/L) in |x - y|."""
    lam = max(params.lam, 1e-12)
    rate = np.sqrt(2.0 * params.gamma_n() / lam + np.pi / L)
    B = int(np.ceil(BAND_RATE_CONSTANT / rate))
    return int(min(max(B, 16), L // 2 - 1))


def flow_band(L: int, B: int) -> np.ndarray:
    """Banded initial state for C = e_0 e_0^T: rows r = 0..B of C(x, x+r)."""
    y = np.zeros((B + 1, L))
    y[0, 0] = 1.0
    return y


def evolve_band(y: np.ndarray, params: ModelParams, T: float,
                dt: float | None = None) -> np.ndarray:
    """Banded 4th-order evolution (compiled kernel when available)."""
    if dt is None:
        dt = stable_dt(params)
    if dt > stable_dt(params) * (1 + 1e-12):
        raise ValueError(f"dt={dt:g} above stability bound {stable_dt(params):g}")
    lam, gam = params.lam, params.gamma_n()
    y = np.ascontiguousarray(y, dtype=np.float64)
    acc = np.empty_like(y)
    k = np.empty_like(y)
    tmp = np.empty_like(y)
    trace0 = float(y[0].sum())
    t = 0.0
    steps = 0
    while t < T - 1e-15:
        h = min(dt, T - t)
        rk4_step(y, acc, k, tmp, h, lam, gam)
        t += h
        steps += 1
        if steps % 4096 == 0:
            if abs(y[0].sum() - trace0) > TRACE_DRIFT_ABORT * max(1.0, abs(trace0)):
                raise InstabilityError(
                    f"trace drift {y[0].sum() - trace0:.3e} at t={t:.4g}")
    if abs(y[0].sum() - trace0) > TRACE_DRIFT_ABORT * max(1.0, abs(trace0)):
        raise InstabilityError(f"trace drift {y[0].sum() - trace0:.3e} at t={T:.4g}")
    return y


def band_to_dense(y: np.ndarray, L: int) -> np.ndarray:
    """Expand banded storage to the full symmetric matrix (small L only)."""
    B = y.shape[0] - 1
    C = np.zeros((L, L))
    idx = np.arange(L)
    C[idx, idx] = y[0]
    for r in range(1, B + 1):
        C[idx, (idx + r) % L] += y[r]
        C[(idx + r) % L, idx] += y[r]
    return C


# ---------------------------------------------------------------------------
# kernels


def default_ring_size(params: ModelParams) -> int:
    return 16 * params.n


def energy_kernel(params: ModelParams, t: float, L: int | None = None,
                  dt: float | None = None, band: int | None = None) -> np.ndarray:
    """S(z) = 2 beta^{-2} C(z,z, t n^a) from flow initial data, centered in z.

    Uses the dense engine for small rings, the banded engine otherwise.
    Emits a finite-size warning when the outer-ring mass gate fails.
    """
    L = default_ring_size(params) if L is None else L
    T = params.horizon(t)
    B = band_width(params, L) if band is None else band
    if L <= DENSE_MAX_L and band is None:
        C = evolve_pair(flow_pair_correlation(L), params, T, dt)
        diag = np.diagonal(C.C).copy()
    else:
        y = evolve_band(flow_band(L, B), params, T, dt)
        edge = float(np.max(np.abs(y[-1])))
        if edge > 1e-9:
            warnings.warn(f"band edge amplitude {edge:.2e} at B={B}; "
                          "increase band width", RuntimeWarning)
        diag = y[0].copy()
    S = 2.0 * params.beta ** -2 * np.roll(diag, L // 2)
    check_finite_size(S, "energy kernel")
    return S


def volume_rhs(m: np.ndarray, lam: float, gam: float) -> np.ndarray:
    up = np.roll(m, -1)
    dn = np.roll(m, 1)
    return (up - dn) - 2.0 * gam * m + lam * (up + dn - 2.0 * m)


def volume_kernel(params: ModelParams, t: float, L: int | None = None,
                  dt: float | None = None) -> np.ndarray:
    """V(z) = beta^{-1} m_z(t n^a) by 4th-order integration of the moment ODE.

    The default step is an eighth of the stability bound: the system is a
    single ring vector, so the extra accuracy (needed by the 1e-8 closed-form
    comparisons) is cheap.
    """
    L = default_ring_size(params) if L is None else L
    if dt is None:
        dt = stable_dt(params) / 8.0
    T = params.horizon(t)
    lam, gam = params.lam, params.gamma_n()
    m = np.zeros(L)
    m[0] = 1.0 / params.beta
    t_now = 0.0
    while t_now < T - 1e-15:
        h = min(dt, T - t_now)
        k1 = volume_rhs(m, lam, gam)
        k2 = volume_rhs(m + 0.5 * h * k1, lam, gam)
        k3 = volume_rhs(m + 0.5 * h * k2, lam, gam)
        k4 = volume_rhs(m + h * k3, lam, gam)
        m += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t_now += h
    V = np.roll(m, L // 2)
    check_finite_size(V, "volume kernel")
    return V


def pair_field(kernel: np.ndarray, f, h, n: int) -> float:
    """(1/n) sum_y h(y/n) sum_z f((y+z)/n) kernel(z) with kernel centered.

    Serves both correlation fields: the energy field with the energy kernel
    and the volume field with the volume kernel.
    """
    L = kernel.size
    z = np.arange(L) - L // 2
    ymax = int(np.ceil(6.0 * n))
    y = np.arange(-ymax, ymax + 1)
    hy = h(y / n)
    keep = np.abs(hy) > 1e-16
    y, hy = y[keep], hy[keep]
    fvals = f((y[:, None] + z[None, :]) / n)
    return float(hy @ (fvals @ kernel) / n)
