"""Exact event-driven simulation of the noisy harmonic chain on a ring.

State is omega in R^L with dynamics d omega_x = (omega_{x+1} - omega_{x-1}) dt,
interrupted by flip events (omega_x -> -omega_x, rate gamma_n per site) and
exchange events (omega_x <-> omega_{x+1}, rate lambda per bond).

The free flow is integrated exactly in Fourier space between events: with
numpy's forward DFT convention (e^{-2 i pi k x / L}) the mode multiplier is
exp(+2 i sin(2 pi k / L) t).  All three parts of the dynamics are orthogonal
maps, so sum omega_x^2 is conserved along every path up to transform roundoff.

Correlation estimators use the random-linear-flow identity: omega(t) = M(t)
omega(0) with M(t) a random orthogonal matrix independent of omega(0), so

    <omega_z(t) omega_0(0)>_beta          = beta^{-1} E[M_{z0}(t)]
    <omega_z^2(t); omega_0^2(0)>_beta     = 2 beta^{-2} E[M_{z0}(t)^2]

and both are estimated by evolving the deterministic column v(0) = e_0,
removing all initial-condition variance.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field

import numpy as np

DEFAULT_MAX_EVENTS = 10_000_000
# free stretches shorter than this are merged with the next event
MIN_FREE_STEP = 1e-14
# transport speed of the drift (used by the ring-size policy)
WAVE_SPEED = 2.0
OUTER_RING_FRACTION = 0.10
OUTER_MASS_GATE = 1e-6


class EventBudgetError(RuntimeError):
    """Event budget exceeded; carries the partial state and log."""

    def __init__(self, msg, state=None, log=None):
        super().__init__(msg)
        self.state = state
        self.log = log


@dataclass(frozen=True)
class ModelParams:
    """Physical and scaling parameters; gamma_n = c * n^{-b}."""

    lam: float = 1.0
    c: float = 1.0
    b: float = 0.5
    n: int = 64
    beta: float = 1.0
    a: float = 1.75

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.c < 0:
            raise ValueError("c must be >= 0")
        if self.b < 0:
            raise ValueError("b must be >= 0")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if self.a <= 0:
            raise ValueError("a must be > 0")
        for name in ("lam", "c", "b", "beta", "a"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def gamma_n(self) -> float:
        return self.c * float(self.n) ** (-self.b)

    def horizon(self, t: float) -> float:
        """Physical time t * n^a."""
        return t * float(self.n) ** self.a


@dataclass
class ChainState:
    L: int
    omega: np.ndarray
    time: float = 0.0
    energy0: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.L < 4:
            raise ValueError("ring size must be >= 4 (periodic stencils degenerate)")
        if self.omega.shape != (self.L,):
            raise ValueError("omega must have shape (L,)")
        if self.energy0 is None:
            self.energy0 = float(np.sum(self.omega**2))

    def energy(self) -> float:
        return float(np.sum(self.omega**2))


@dataclass
class NoiseEventLog:
    times: list = field(default_factory=list)
    kinds: list = field(default_factory=list)   # "flip" | "exchange"
    sites: list = field(default_factory=list)

    def append(self, t, kind, site):
        self.times.append(t)
        self.kinds.append(kind)
        self.sites.append(site)

    def __len__(self):
        return len(self.times)


def sample_gibbs(params: ModelParams, L: int, seed: int) -> ChainState:
    """Product Gaussian state: each omega_x ~ N(0, 1/beta), deterministic in seed."""
    if L < 4:
        raise ValueError("ring size must be >= 4")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    omega = rng.normal(0.0, params.beta ** -0.5, size=L)
    return ChainState(L=L, omega=omega)


def free_multiplier(L: int, dt: float) -> np.ndarray:
    """Per-mode phase of the exact free flow, rfft layout."""
    k = np.arange(L // 2 + 1)
    return np.exp(2j * np.sin(2 * np.pi * k / L) * dt)


def evolve_free(state: ChainState, dt: float) -> ChainState:
    """Exact free evolution by dt (Fourier diagonalization of the circulant drift)."""
    if dt < 0:
        raise ValueError("dt must be >= 0")
    if dt == 0.0:
        return ChainState(state.L, state.omega.copy(), state.time, state.energy0)
    omega = np.fft.irfft(np.fft.rfft(state.omega) * free_multiplier(state.L, dt), n=state.L)
    return ChainState(state.L, omega, state.time + dt, state.energy0)


def apply_flip(state: ChainState, x: int) -> ChainState:
    if not 0 <= x < state.L:
        raise IndexError(f"site {x} out of range [0, {state.L})")
    omega = state.omega.copy()
    omega[x] = -omega[x]
    return ChainState(state.L, omega, state.time, state.energy0)


def apply_exchange(state: ChainState, x: int) -> ChainState:
    if not 0 <= x < state.L:
        raise IndexError(f"site {x} out of range [0, {state.L})")
    omega = state.omega.copy()
    y = (x + 1) % state.L
    omega[x], omega[y] = omega[y], omega[x]
    return ChainState(state.L, omega, state.time, state.energy0)


def _max_events() -> int:
    return int(os.environ.get("EVANESCENT_MAX_EVENTS", DEFAULT_MAX_EVENTS))


def _evolve_vector(v: np.ndarray, params: ModelParams, horizon: float,
                   rng: np.random.Generator, log: NoiseEventLog | None = None,
                   t0: float = 0.0):
    """Event-driven evolution of a vector under the random linear flow (in place)."""
    L = v.shape[0]
    gam = params.gamma_n()
    lam = params.lam
    rate = (gam + lam) * L
    budget = _max_events()
    t = 0.0
    n_events = 0
    if rate == 0.0 or horizon == 0.0:
        if horizon > 0.0:
            v[:] = np.fft.irfft(np.fft.rfft(v) * free_multiplier(L, horizon), n=L)
        return v, n_events
    p_flip = gam / (gam + lam)
    spec = np.fft.rfft(v)
    spec_time = 0.0  # time the spectrum is synchronized to
    while True:
        wait = rng.exponential(1.0 / rate)
        if t + wait >= horizon:
            break
        t += wait
        n_events += 1
        if n_events > budget:
            v[:] = np.fft.irfft(spec * free_multiplier(L, t - spec_time), n=L)
            raise EventBudgetError(
                f"event budget {budget} exceeded at t={t:.6g}/{horizon:.6g}",
                state=v, log=log)
        dt_free = t - spec_time
        if dt_free > MIN_FREE_STEP:
            spec *= free_multiplier(L, dt_free)
            spec_time = t
        v[:] = np.fft.irfft(spec, n=L)
        u = rng.random()
        site = int(rng.integers(L))
        if u < p_flip:
            v[site] = -v[site]
            if log is not None:
                log.append(t0 + t, "flip", site)
        else:
            y = (site + 1) % L
            v[site], v[y] = v[y], v[site]
            if log is not None:
                log.append(t0 + t, "exchange", site)
        spec = np.fft.rfft(v)
        spec_time = t
    v[:] = np.fft.irfft(spec * free_multiplier(L, horizon - spec_time), n=L)
    return v, n_events


def simulate(state: ChainState, params: ModelParams, horizon: float, seed: int):
    """Exact event-driven run over [0, horizon]; returns (final state, event log).

    Total event rate is (gamma_n + lambda) L; waiting times are exponential,
    each event is a flip at a uniform site with probability gamma_n/(gamma_n
    + lambda), else an exchange at a uniform bond.  Deterministic in seed.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    log = NoiseEventLog()
    omega = state.omega.copy()
    _evolve_vector(omega, params, horizon, rng, log=log, t0=state.time)
    return ChainState(state.L, omega, state.time + horizon, state.energy0), log


def ring_policy_size(params: ModelParams, t: float) -> int:
    """L >= max(16 n, 4 ceil(speed * t * n^a)) with speed 2."""
    return int(max(16 * params.n, 4 * np.ceil(WAVE_SPEED * params.horizon(t))))


def check_finite_size(kernel: np.ndarray, what: str) -> bool:
    """Warn when kernel mass in the outer 10% of the (centered) ring is above gate."""
    L = kernel.size
    outer = int(np.floor(OUTER_RING_FRACTION * L / 2))
    total = float(np.sum(np.abs(kernel)))
    if outer == 0 or total == 0.0:
        return True
    mass = float(np.sum(np.abs(kernel[:outer])) + np.sum(np.abs(kernel[-outer:])))
    if mass > OUTER_MASS_GATE * total:
        warnings.warn(
            f"{what}: kernel mass {mass / total:.2e} of total in outer "
            f"{OUTER_RING_FRACTION:.0%} of the ring (gate {OUTER_MASS_GATE:g})",
            RuntimeWarning)
        return False
    return True


def _replica_seeds(seed: int, replicas: int):
    return np.random.SeedSequence(seed).spawn(replicas)


def estimate_energy_correlation(params: ModelParams, t: float, replicas: int,
                                L: int, seed: int):
    """Flow-column estimator of S(z) = <omega_z^2(t n^a); omega_0^2(0)>_beta.

    Runs the flow from v(0) = e_0 and averages 2 beta^{-2} v_z(T)^2 over noise
    realizations.  Returns (S, stderr) on centered sites z in [-L/2, L/2).
    """
    if replicas < 2:
        raise ValueError("need at least 2 replicas for a standard error")
    horizon = params.horizon(t)
    samples = np.empty((replicas, L))
    for r, ss in enumerate(_replica_seeds(seed, replicas)):
        rng = np.random.default_rng(ss)
        v = np.zeros(L)
        v[0] = 1.0
        _evolve_vector(v, params, horizon, rng)
        samples[r] = 2.0 * params.beta ** -2 * v**2
    samples = np.roll(samples, L // 2, axis=1)  # center z = 0
    mean = samples.mean(axis=0)
    stderr = samples.std(axis=0, ddof=1) / np.sqrt(replicas)
    check_finite_size(mean, "energy correlation")
    return mean, stderr


def estimate_volume_correlation(params: ModelParams, t: float, replicas: int,
                                L: int, seed: int):
    """Flow-column estimator of V(z) = <omega_z(t n^a) omega_0(0)>_beta."""
    if replicas < 2:
        raise ValueError("need at least 2 replicas for a standard error")
    horizon = params.horizon(t)
    samples = np.empty((replicas, L))
    for r, ss in enumerate(_replica_seeds(seed, replicas)):
        rng = np.random.default_rng(ss)
        v = np.zeros(L)
        v[0] = 1.0
        _evolve_vector(v, params, horizon, rng)
        samples[r] = v / params.beta
    samples = np.roll(samples, L // 2, axis=1)
    mean = samples.mean(axis=0)
    stderr = samples.std(axis=0, ddof=1) / np.sqrt(replicas)
    check_finite_size(mean, "volume correlation")
    return mean, stderr


def gaussian_initial_energy_mc(params: ModelParams, t: float, replicas: int,
                               L: int, seed: int):
    """Brute-force oracle: sample omega(0) ~ mu_beta and average
    omega_z^2(T) (omega_0^2(0) - 1/beta) directly (no variance reduction)."""
    if replicas < 2:
        raise ValueError("need at least 2 replicas for a standard error")
    horizon = params.horizon(t)
    samples = np.empty((replicas, L))
    for r, ss in enumerate(_replica_seeds(seed, replicas)):
        rng = np.random.default_rng(ss)
        omega = rng.normal(0.0, params.beta ** -0.5, size=L)
        w0 = omega[0] ** 2 - 1.0 / params.beta
        _evolve_vector(omega, params, horizon, rng)
        samples[r] = omega**2 * w0
    samples = np.roll(samples, L // 2, axis=1)
    mean = samples.mean(axis=0)
    stderr = samples.std(axis=0, ddof=1) / np.sqrt(replicas)
    return mean, stderr


def centered_sites(L: int) -> np.ndarray:
    """Site coordinates matching the centered kernels: -L/2 .. L/2 - 1."""
    return np.arange(L) - L // 2
