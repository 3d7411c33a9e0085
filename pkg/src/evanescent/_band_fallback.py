"""Pure-numpy twin of the compiled banded kernel (same call signatures).

Selected by evanescent._core when the extension is not built; slower but
numerically identical up to floating-point associativity in the stencil sums.
"""

from __future__ import annotations

import numpy as np


def band_rhs(y: np.ndarray, out: np.ndarray, lam: float, gam: float) -> None:
    B = y.shape[0] - 1
    if B < 2:
        raise ValueError("band needs at least rows 0..2")
    four_gam = 4.0 * gam
    d, e, o2 = y[0], y[1], y[2]
    dp = np.roll(d, -1)
    out[0] = 2.0 * (e - np.roll(e, 1)) + lam * (dp + np.roll(d, 1) - 2.0 * d)
    o2m = np.roll(o2, 1)
    out[1] = (dp - o2m + o2 - d) + lam * (o2m + o2 - 2.0 * e) - four_gam * e
    if B >= 3:
        lo = y[1:B - 1]                       # rows r-1 for r = 2..B-1
        hi = y[3:B + 1]                       # rows r+1
        lop = np.roll(lo, -1, axis=1)
        him = np.roll(hi, 1, axis=1)
        out[2:B] = (lop - him + hi - lo) \
            + lam * (lop + him + hi + lo - 4.0 * y[2:B]) - four_gam * y[2:B]
    lob = y[B - 1]
    lobp = np.roll(lob, -1)
    out[B] = (lobp - lob) + lam * (lobp + lob - 4.0 * y[B]) - four_gam * y[B]


def rk4_step(y: np.ndarray, acc: np.ndarray, k: np.ndarray, tmp: np.ndarray,
             dt: float, lam: float, gam: float) -> None:
    band_rhs(y, k, lam, gam)
    np.multiply(k, dt / 6.0, out=acc)
    acc += y
    np.multiply(k, dt / 2.0, out=tmp)
    tmp += y
    band_rhs(tmp, k, lam, gam)
    acc += (dt / 3.0) * k
    np.multiply(k, dt / 2.0, out=tmp)
    tmp += y
    band_rhs(tmp, k, lam, gam)
    acc += (dt / 3.0) * k
    np.multiply(k, dt, out=tmp)
    tmp += y
    band_rhs(tmp, k, lam, gam)
    np.multiply(k, dt / 6.0, out=k)
    acc += k
    y[:] = acc
