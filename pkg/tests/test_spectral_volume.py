import numpy as np
import pytest

from evanescent import moments as mo, spectral_volume as sv
from evanescent.chain import ModelParams
from evanescent.fourier import gaussian, hermite_gaussian

F = gaussian()


def params(a, b, n, lam=1.0, c=1.0, beta=1.0):
    return ModelParams(lam=lam, c=c, b=b, n=n, beta=beta, a=a)


def test_volume_hat_theta_zero():
    p = params(1.0, 0.5, 16, beta=2.0)
    t = 3.0
    val = sv.volume_hat(0.0, t, p)
    assert val == pytest.approx(np.exp(-2 * p.gamma_n() * t) / 2.0)


def test_volume_hat_t0_flat():
    p = params(1.0, 0.5, 16, beta=4.0)
    theta = np.linspace(-0.5, 0.5, 11)
    assert np.max(np.abs(sv.volume_hat(theta, 0.0, p) - 0.25)) < 1e-15


def test_volume_hat_modulus():
    p = params(1.0, 0.5, 16)
    theta = np.linspace(-0.5, 0.5, 101)
    t = 1.7
    expect = np.exp(-t * (2 * p.gamma_n() + 4 * p.lam * np.sin(np.pi * theta) ** 2))
    assert np.max(np.abs(np.abs(sv.volume_hat(theta, t, p)) - expect)) < 1e-14


def test_eta_t0_matches_overlap():
    p = params(1.0, 1.0, 512)
    val = sv.eta(F, F, 0.0, p)
    lattice = np.sum(F(np.arange(-8 * 512, 8 * 512 + 1) / 512) ** 2) / 512
    assert abs(val - lattice) < 1e-9


def test_eta_matches_moment_route():
    """Independent derivations of the same finite-n object (1e-6 gate)."""
    p = params(1.0, 2.0, 128)
    V = mo.volume_kernel(p, 0.5, L=2048)
    route_moment = mo.pair_field(V, F, F, 128)
    route_spectral = sv.eta(F, F, 0.5, p)
    assert abs(route_moment - route_spectral) < 1e-6


def test_eta_vanishes_above_a2():
    vals = []
    for n in (1000, 10000):
        p = params(2.5, 2.5, n)
        val, bound = sv.eta_with_bound(F, F, 0.5, p)
        vals.append(abs(val) + (bound or 0.0))
    assert vals[1] < vals[0]
    assert vals[1] < 1e-3


def test_eta_tilde_requires_superhyperbolic():
    with pytest.raises(ValueError):
        sv.eta_tilde(F, F, 0.5, params(1.0, 1.5, 100))


def test_eta_tilde_coincides_with_eta_at_t0():
    p = params(1.5, 1.8, 300)
    assert sv.eta_tilde(F, F, 0.0, p) == pytest.approx(sv.eta(F, F, 0.0, p), abs=1e-10)


def test_transport_direction_is_left_moving():
    """Asymmetric f: the finite-n field matches f shifted by -2t, not +2t."""
    fo = hermite_gaussian(1)
    p = params(1.0, 2.5, 4000)
    v = sv.eta(fo, F, 0.5, p)
    good = sv._overlap(fo, F, +1.0)   # f(u - 2t) h(u)
    bad = sv._overlap(fo, F, -1.0)
    assert abs(v - good) < 1e-3
    assert abs(v - bad) > 0.1


def test_classify_regime_cases():
    r = sv.classify_regime(1.0, 1.5)
    assert r.label == "transport" and r.transport == 2.0 and r.frame == "static"
    r = sv.classify_regime(1.0, 1.0)
    assert r.label == "relaxation+transport" and r.relaxation == 2.0
    r = sv.classify_regime(2.0, 3.0)
    assert r.label == "heat" and r.diffusion == 1.0 and r.frame == "translated"
    r = sv.classify_regime(2.0, 2.0)
    assert r.label == "relaxation+heat"
    assert sv.classify_regime(0.5, 0.5).label == "relaxation"
    assert sv.classify_regime(3.0, 2.5).label == "vanish"
    assert sv.classify_regime(0.3, 0.8).label == "no-evolution"
    assert sv.classify_regime(1.5, 1.5).frame == "translated"
    # vanish statements are about the static field even when a > 1
    assert sv.classify_regime(2.5, 2.5).frame == "static"
    with pytest.raises(ValueError):
        sv.classify_regime(-1.0, 1.0)


def test_limit_correlation_relaxation_factor():
    p = params(1.5, 1.5, 100, c=0.7)
    label = sv.classify_regime(1.5, 1.5)
    t = 0.8
    base = sv.limit_correlation(label, F, F, 0.0, p)
    val = sv.limit_correlation(label, F, F, t, p)
    assert val == pytest.approx(np.exp(-2 * 0.7 * t) * base, rel=1e-12)
    assert base == pytest.approx(1.0 / np.sqrt(2.0), rel=1e-7)


def test_limit_correlation_transport_shift():
    label = sv.classify_regime(1.0, 1.5)
    p = params(1.0, 1.5, 100)
    t = 0.5
    val = sv.limit_correlation(label, F, F, t, p)
    # Gaussian overlap with shift 2t: e^{-pi (2t)^2 / 2} / sqrt(2)
    assert val == pytest.approx(np.exp(-np.pi * 0.5) / np.sqrt(2.0), rel=1e-7)


def test_limit_correlation_heat_variance():
    label = sv.classify_regime(2.0, 3.0)
    p = params(2.0, 3.0, 100, lam=0.8)
    t = 0.6
    var = 2.0 * p.lam * t
    val = sv.limit_correlation(label, F, F, t, p)
    assert val == pytest.approx(1.0 / np.sqrt(2.0) / np.sqrt(1.0 + np.pi * var),
                                rel=1e-6)


def test_eta_bound_invariant():
    """|eta| <= beta^{-1} int |F_n f| |F_n h| (the modulus-bound route)."""
    for (a, b, n) in [(1.0, 1.5, 200), (0.5, 1.0, 400), (2.0, 2.0, 1000)]:
        p = params(a, b, n)
        field = sv.regime_field(F, F, 0.7, p)
        xi = np.linspace(-n / 2, n / 2, 40001)
        bound = np.trapezoid(np.abs(F.lattice_ft(n, xi)) ** 2, xi) / p.beta
        assert abs(field) <= bound + 1e-12


def test_phase_diagram_rows_cover_cases():
    rows = sv.phase_diagram_rows(F, F, 0.5, params(1.0, 1.0, 100),
                                 n_values=(200,))
    labels = {r["label"] for r in rows}
    assert {"no-evolution", "vanish", "transport", "relaxation",
            "relaxation+transport", "relaxation+heat"} <= labels
    assert len(rows) == 12


def test_heat_point_converges():
    r = sv.volume_case_errors(F, F, 0.5, params(1.0, 1.0, 100), 2.0, 2.0,
                              n_values=(500, 2000))
    assert r["err_n2000"] < r["err_n500"] < 1e-4
