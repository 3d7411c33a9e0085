"""Backend selection for the banded moment kernel.

Prefers the compiled extension (evanescent._band_kernel, built from the
Cython source); falls back to the pure-numpy implementation when the
extension is unavailable.  Both expose band_rhs(y, out, lam, gam) and
rk4_step(y, acc, k, tmp, dt, lam, gam) with identical semantics.
"""

try:
    from ._band_kernel import band_rhs, rk4_step  # type: ignore[attr-defined]

    BACKEND = "compiled"
except ImportError:  # pragma: no cover - depends on build environment
    from ._band_fallback import band_rhs, rk4_step

    BACKEND = "python"

__all__ = ["BACKEND", "band_rhs", "rk4_step"]
