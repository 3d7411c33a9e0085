import numpy as np
import pytest

from evanescent import fractional as fr
from evanescent.chain import ModelParams
from evanescent.fourier import gaussian

P64 = ModelParams(lam=1.0, c=1.0, b=0.5, n=64, beta=1.0, a=1.5)
P_T2 = ModelParams(lam=1.0, c=1.0, b=2.0, n=64, beta=1.0, a=1.5)
F = gaussian()

YGRID = np.linspace(-0.5, 0.5, 201)[1:-1]
YGRID = YGRID[YGRID != 0.0]


def test_symbol_ranges_and_symmetry():
    rng = np.random.default_rng(0)
    x, y = rng.uniform(-0.5, 0.5, 500), rng.uniform(-0.5, 0.5, 500)
    lam_ = fr.Lambda_sym(x, y)
    om = fr.Omega_sym(x, y)
    assert np.all((lam_ >= 0) & (lam_ <= 8.0))
    assert np.all((om >= -4.0) & (om <= 4.0))
    assert np.max(np.abs(lam_ - fr.Lambda_sym(y, x))) < 1e-15
    assert np.max(np.abs(om - fr.Omega_sym(y, x))) < 1e-15


def test_stencils_hand_checked():
    """Each stencil map vs direct arithmetic at hand-picked points."""
    n = 4

    def g(u):
        return u**3

    def h(u, v):
        return u**2 + 2.0 * u * v

    # Laplacian of u^3 at x=2: n^2 ((3/4)^3 + (1/4)^3 - 2 (2/4)^3)
    assert fr.laplacian_1d(g, 2, n) == pytest.approx(
        16 * ((0.75**3) + (0.25**3) - 2 * 0.5**3))
    # 2-D Laplacian at (1, 2)
    val = 16 * (h(0.5, 0.5) + h(0.0, 0.5) + h(0.25, 0.75) + h(0.25, 0.25)
                - 4 * h(0.25, 0.5))
    assert fr.laplacian_2d(h, 1, 2, n) == pytest.approx(val)
    # gradient-on-diagonal: off-band entries vanish
    assert fr.grad_tensor_delta(g, 1, 2, n) == pytest.approx(
        0.5 * 16 * (g(0.5) - g(0.25)))
    assert fr.grad_tensor_delta(g, 1, 0, n) == pytest.approx(
        0.5 * 16 * (g(0.25) - g(0.0)))
    assert fr.grad_tensor_delta(g, 1, 3, n) == 0.0
    # directional derivative along (-2, -2) at (1, 1)
    val = 4 * (h(0.25, 0.0) + h(0.0, 0.25) - h(0.25, 0.5) - h(0.5, 0.25))
    assert fr.directional_derivative(h, 1, 1, n) == pytest.approx(val)
    # diagonal derivative at x = 2
    assert fr.diagonal_derivative(h, 2, n) == pytest.approx(
        4 * (h(0.5, 0.75) - h(0.25, 0.5)))
    # off-diagonal derivative cases
    assert fr.offdiagonal_derivative(h, 2, 3, n) == pytest.approx(
        16 * (h(0.5, 0.75) - h(0.5, 0.5)))
    assert fr.offdiagonal_derivative(h, 2, 1, n) == pytest.approx(
        16 * (h(0.25, 0.5) - h(0.25, 0.25)))
    assert fr.offdiagonal_derivative(h, 2, 0, n) == 0.0


def test_hn_hat_zero_numerator():
    assert fr.hn_hat(0.0, 0.0, 64, F, P64) == 0.0


def test_hn_hat_conjugate_symmetry():
    k = np.array([3.0, -7.5, 11.0])
    ell = np.array([2.0, 4.5, -9.0])
    a = fr.hn_hat(k, ell, 64, F, P64)
    b = fr.hn_hat(-k, -ell, 64, F, P64)
    assert np.max(np.abs(b - np.conj(a))) < 1e-15


def test_solve_hn_vn_residual():
    pair = fr.solve_hn_vn(64, F, P_T2, m=128)
    assert pair.residual < 1e-8


def test_solve_requires_flip():
    p = ModelParams(lam=1.0, c=0.0, b=2.0, n=64, beta=1.0, a=1.5)
    with pytest.raises(ValueError):
        fr.circle_poles(0.1, p)


def test_G0_values():
    assert fr.G0(0.0) == 0.0
    y = np.linspace(-0.5, 0.5, 41)
    assert np.max(np.abs(fr.G0(-y) - np.conj(fr.G0(y)))) == 0.0
    expect = 0.5 * (np.pi / 2) ** 1.5 * (1 + 1j)
    assert fr.G0(0.5) == pytest.approx(expect)


@pytest.mark.parametrize("n", [64, 256])
def test_Gn_routes_agree(n):
    p = ModelParams(lam=1.0, c=1.0, b=0.5, n=n, beta=1.0, a=1.5)
    ys = np.linspace(-0.5, 0.5, 200)
    worst = max(abs(fr.Gn_quadrature(float(y), p) - complex(fr.Gn_residue(float(y), p)))
                for y in ys)
    assert worst < 1e-8


def test_Gn_dissipative():
    vals = fr.Gn_residue(YGRID, P64)
    assert np.min(vals.real) >= -1e-14


def test_G0_proximity_bound():
    for p in (P64, ModelParams(lam=1.0, c=1.0, b=0.5, n=256, beta=1.0, a=1.5)):
        dif = np.abs(fr.Gn_residue(YGRID, p) - fr.G0(YGRID))
        C = np.max(dif / fr.G0_bound_terms(YGRID, p.gamma_n()))
        assert np.isfinite(C) and C < 3.0


def test_W_symmetry_and_bound():
    for y in (0.03, 0.2, 0.45):
        assert fr.W_of_y(y) == pytest.approx(fr.W_of_y(-y), rel=1e-10)
    ys = np.geomspace(1e-4, 0.5, 20)
    consts = [fr.W_of_y(float(y)) * y**1.5 for y in ys]
    assert max(consts) < 1.0
    with pytest.raises(ZeroDivisionError):
        fr.W_of_y(0.0)


def test_W_at_half_stable_under_refinement():
    a = fr.W_of_y(0.5, tol=1e-10)
    b = fr.W_of_y(0.5, tol=1e-12)
    assert abs(a - b) < 1e-10


@pytest.mark.parametrize("n", [64, 256])
def test_IJK_routes_agree(n):
    p = ModelParams(lam=1.0, c=1.0, b=0.5, n=n, beta=1.0, a=1.5)
    ys = np.linspace(-0.5, 0.5, 50)
    for y in ys:
        y = float(y)
        assert abs(fr.In_quadrature(y, p) - complex(fr.In_residue(y, p))) < 1e-8
        assert abs(fr.Jn_quadrature(y, p) - complex(fr.Jn_residue(y, p))) < 1e-8
        assert abs(fr.Kn_quadrature(y, p) - complex(fr.Kn_residue(y, p))) < 1e-8


def test_K_over_I_identity():
    w = np.exp(2j * np.pi * YGRID)
    lhs = fr.Kn_residue(YGRID, P64)
    rhs = -w / (w - 1.0) * fr.In_residue(YGRID, P64)
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_pole_moduli_and_product():
    for p in (P64, ModelParams(lam=1.0, c=1.0, b=0.5, n=1024, beta=1.0, a=1.5)):
        poles = fr.circle_poles(YGRID, p)
        assert np.all(np.abs(poles.z_minus) < 1.0)
        assert np.all(np.abs(poles.z_plus) > 1.0)
        assert np.max(np.abs(np.abs(poles.z_minus * poles.z_plus) - 1.0)) < 1e-12


def test_IJK_bounds_uniform():
    s = np.abs(np.sin(np.pi * YGRID))
    consts = {"I": [], "J": [], "K": []}
    for n in (64, 256, 1024):
        p = ModelParams(lam=1.0, c=1.0, b=0.5, n=n, beta=1.0, a=1.5)
        consts["I"].append(np.max(np.abs(fr.In_residue(YGRID, p)) / s**1.5))
        consts["J"].append(np.max(np.abs(fr.Jn_residue(YGRID, p)) * s**0.5))
        consts["K"].append(np.max(np.abs(fr.Kn_residue(YGRID, p)) / s**0.5))
    for vals in consts.values():
        assert all(np.isfinite(v) for v in vals)
        assert max(vals) < 3.0 * max(min(vals), 0.1)


def test_decay_norm_ladder_light():
    a = fr.decay_norms(64, F, ModelParams(lam=1.0, c=1.0, b=2.0, n=64,
                                          beta=1.0, a=1.5))
    b = fr.decay_norms(256, F, ModelParams(lam=1.0, c=1.0, b=2.0, n=256,
                                           beta=1.0, a=1.5))
    for key in ("hn_norm_sq", "vn_norm_sq", "dn_vn_norm_sq", "tilde_dn_vn",
                "dn_hn_error_sq"):
        assert b[key] < a[key]
    assert 0.2 < b["l33"] / a["l33"] < 5.0


def test_symbol_identity_before_inversion():
    xi = np.linspace(-40, 40, 4001)
    assert fr.symbol_defect(xi) < 1e-10


def test_kernel_positive_mass_and_imag():
    u = np.linspace(-8, 10, 301)
    P, imag = fr.fractional_kernel(1.0, u, return_imag=True)
    assert imag < 1e-10
    assert np.min(P) > -1e-8
    # light mass check on a moderate window plus measured tail exponent
    ug = fr.kernel_mass_grid(1.0, outer=2000.0, n_outer=400)
    Pg = fr.fractional_kernel(1.0, ug, tol=1e-8)
    assert abs(np.trapezoid(Pg, ug) - 1.0) < 5e-5


def test_kernel_self_similarity():
    u = np.linspace(-5, 7, 101)
    t = 2.0
    a = fr.fractional_kernel(t, u)
    b = fr.fractional_kernel(1.0, u * t ** (-2 / 3)) * t ** (-2 / 3)
    assert np.max(np.abs(a - b)) < 1e-6


def test_kernel_matches_stable_oracle():
    u = np.linspace(-4, 6, 21)
    a = fr.fractional_kernel(1.0, u)
    b = fr.stable_density_oracle(u, 1.0)
    assert np.max(np.abs(a - b)) < 1e-6


def test_kernel_requires_positive_t():
    with pytest.raises(ValueError):
        fr.fractional_kernel(0.0, np.array([0.0]))


def test_theorem2_target_small_time_limit():
    fh = float(np.trapezoid(F(np.linspace(-8, 8, 4001)) ** 2,
                            np.linspace(-8, 8, 4001)))
    prev = None
    for t in (0.1, 0.01):
        val = fr.theorem2_target(F, F, t, beta=1.0)
        err = abs(val - 2.0 * fh)
        if prev is not None:
            assert err < prev
        prev = err
    assert prev < 0.05


def test_theorem2_target_reflection_identity():
    """iint f(u) h(v) P_t(u-v) = iint h(u) f(v) P~_t(u-v), P~(x) = P(-x)."""
    from evanescent.fourier import hermite_gaussian

    g = hermite_gaussian(2)
    t = 0.7
    direct = fr.theorem2_target(F, g, t, beta=1.0)
    v = np.linspace(-10, 10, 2001)
    s = np.linspace(-14, 14, 1401)
    Pref = fr.fractional_kernel(t, -s)
    corr = np.array([np.trapezoid(g(u + si) * F(u), v) for si, u in
                     ((si, v) for si in s)])
    swapped = float(2.0 * np.trapezoid(Pref * corr, s))
    assert abs(direct - swapped) < 1e-8


def test_theorem2_target_grid_stability():
    a = fr.theorem2_target(F, F, 1.0, beta=1.0)
    v = np.linspace(-12.0, 12.0, 4001)
    s = np.linspace(-16.0, 16.0, 2801)
    P = fr.fractional_kernel(1.0, s)
    corr = np.array([np.trapezoid(F(v + si) * F(v), v) for si in s])
    refined = float(2.0 * np.trapezoid(P * corr, s))
    assert abs(a - refined) < 1e-6
