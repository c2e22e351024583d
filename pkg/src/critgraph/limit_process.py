"""Limit processes of the rescaled exploration walk.

* ``W(t) = sqrt(beta/mu) B(t) - (beta / 2 mu^2) t^2`` (finite third moment).
* ``X(t) + A(t)`` (power-law tail ``c k^-gamma``, ``3 < gamma < 4``), where
  ``X`` is the compensated jump process with intensity
  ``(c/mu) x^{1-gamma} exp(-x s/mu) ds dx`` and
  ``A(t) = -c Gamma(4-gamma) / ((gamma-3)(gamma-2) mu^{gamma-2}) t^{gamma-2}``.

Jumps larger than ``eps`` are simulated exactly by thinning; the compensated
jumps below ``eps`` are replaced by a Gaussian with the same variance.
"""

import functools
import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy import integrate
from scipy import special as sp

from .errors import EpsTooSmall, GammaOutOfRange
from .excursions import path_excursions
from .paths import LimitPath, PathKind
from .special import upper_gamma

DEFAULT_EPS = 1e-3
DEFAULT_DT = 1e-4
MAX_JUMPS = 50_000_000

__all__ = [
    "LevySpec",
    "LimitPath",
    "PathKind",
    "simulate_brownian_parabolic",
    "drift_powerlaw",
    "simulate_powerlaw_limit",
    "sample_powerlaw_marginal",
    "moment_oracles",
    "characteristic_function",
    "harvest_excursions",
]


@dataclass(frozen=True)
class LevySpec:
    """Parameters ``(c, gamma, mu)`` of the power-law limit."""

    c: float
    gamma: float
    mu: float

    def __post_init__(self):
        if not 3.0 < self.gamma < 4.0:
            raise GammaOutOfRange(f"gamma = {self.gamma} not in (3, 4)", invariant="gamma", residual=self.gamma)
        if self.c <= 0 or self.mu <= 0:
            raise ValueError("c and mu must be positive")

    @classmethod
    def from_law(cls, law):
        if not law.is_power_law:
            raise ValueError("law is not in the power-law regime")
        return cls(c=law.tail_c, gamma=law.tail_gamma, mu=law.mu)

    @property
    def drift_coefficient(self):
        g = self.gamma
        return self.c * math.gamma(4.0 - g) / ((g - 3.0) * (g - 2.0) * self.mu ** (g - 2.0))

    def jump_density(self, s, x):
        return self.c / self.mu * x ** (1.0 - self.gamma) * np.exp(-x * s / self.mu)

    # -- integrals of the jump measure over [0, t] x (eps, inf) or (0, eps] --

    def big_jump_rate(self, s, eps):
        """``int_{x > eps} (c/mu) x^{1-gamma} e^{-x s/mu} dx``, decreasing in s."""
        g = self.gamma
        s = np.asarray(s, dtype=float)
        b = s / self.mu
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.power(b, g - 2.0) * upper_gamma(2.0 - g, eps * b)
        val = np.where(b > 0, val, eps ** (2.0 - g) / (g - 2.0))
        return self.c / self.mu * val

    def compensator(self, t, eps):
        """``int_0^t ds int_{x > eps} x nu(ds, dx)``."""
        g = self.gamma
        t = np.asarray(t, dtype=float)
        b = t / self.mu
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.power(b, g - 2.0) * upper_gamma(2.0 - g, eps * b)
        tail = np.where(b > 0, tail, eps ** (2.0 - g) / (g - 2.0))
        return self.c * (eps ** (2.0 - g) / (g - 2.0) - tail)

    def small_jump_variance(self, t, eps):
        """``c int_0^eps x^{2-gamma} (1 - e^{-x t/mu}) dx`` (integration by parts)."""
        g = self.gamma
        t = np.asarray(t, dtype=float)
        b = t / self.mu
        first = eps ** (3.0 - g) * -np.expm1(-b * eps) / (3.0 - g)
        with np.errstate(divide="ignore", invalid="ignore"):
            second = np.power(b, g - 3.0) * math.gamma(4.0 - g) * sp.gammainc(4.0 - g, b * eps) / (3.0 - g)
        val = np.where(b > 0, first - second, 0.0)
        return self.c * val

    def variance(self, t):
        g = self.gamma
        return self.c * math.gamma(4.0 - g) * self.mu ** (3.0 - g) * t ** (g - 3.0) / (g - 3.0)

    def expected_big_jumps(self, t, eps):
        """Mean number of jumps above ``eps`` in ``[0, t]``."""
        g = self.gamma
        b = t / self.mu
        f = lambda x: x ** (-g) * -math.expm1(-x * b)
        val, _ = integrate.quad(f, eps, np.inf, limit=200)
        return self.c * val


def drift_powerlaw(spec, t):
    """``A(t) = -coef * t^{gamma-2}``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    out = -spec.drift_coefficient * np.power(t, spec.gamma - 2.0)
    return float(out) if out.ndim == 0 else out


def moment_oracles(spec, t):
    """Mean, variance, and the small-jump (``x <= 1``) variance bound at ``t``.

    Returns ``(mean, variance, small_jump_variance, small_jump_bound)`` with
    bound ``c (t/mu)^{gamma-3} / ((gamma-3)(4-gamma))``.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    g = spec.gamma
    if t == 0:
        return 0.0, 0.0, 0.0, 0.0
    bound = spec.c * (t / spec.mu) ** (g - 3.0) / ((g - 3.0) * (4.0 - g))
    return 0.0, spec.variance(t), float(spec.small_jump_variance(t, 1.0)), bound


def characteristic_function(spec, t, u):
    """``E exp(i u X(t))``; the time integral of the jump measure is done in
    closed form, leaving one quadrature in the jump size."""
    g, c, mu = spec.gamma, spec.c, spec.mu
    b = t / mu

    def w(x):
        return c * x ** (-g) * -math.expm1(-x * b)

    quad = functools.partial(integrate.quad, limit=500)
    if u == 0:
        return 1.0 + 0.0j
    # On (0, 1) substitute x = y^2 to remove the x^{3-gamma} singularity;
    # the oscillatory tail goes through QAWF.
    re = quad(lambda y: -2.0 * math.sin(0.5 * u * y * y) ** 2 * w(y * y) * 2.0 * y, 0.0, 1.0)[0]
    re += quad(w, 1.0, np.inf, weight="cos", wvar=u)[0] - quad(w, 1.0, np.inf)[0]
    im = quad(lambda y: (math.sin(u * y * y) - u * y * y) * w(y * y) * 2.0 * y, 0.0, 1.0)[0]
    im += quad(w, 1.0, np.inf, weight="sin", wvar=u)[0] - u * quad(lambda x: x * w(x), 1.0, np.inf)[0]
    return complex(np.exp(re + 1j * im))


# --------------------------------------------------------------------------
# Brownian motion with parabolic drift


def brownian_increments(mu, beta, t0, m, dt, rng):
    t = t0 + dt * np.arange(m + 1)
    drift = -(beta / (2.0 * mu**2)) * np.diff(t**2)
    return math.sqrt(beta / mu * dt) * rng.standard_normal(m) + drift


def _path_from_increments(inc, dt, kind):
    v = np.empty(len(inc) + 1)
    v[0] = 0.0
    np.cumsum(inc, out=v[1:])
    return LimitPath.from_values(v, dt, kind)


def _steps(horizon, dt):
    if dt <= 0 or horizon < dt:
        raise ValueError("need dt > 0 and horizon >= dt")
    m = int(round(horizon / dt))
    if abs(m * dt - horizon) > 1e-9 * horizon:
        raise ValueError("horizon must be a multiple of dt")
    return m


def simulate_brownian_parabolic(mu, beta, horizon, dt, rng):
    if beta <= 0:
        raise ValueError("beta must be positive")
    m = _steps(horizon, dt)
    return _path_from_increments(brownian_increments(mu, beta, 0.0, m, dt, rng), dt, PathKind.BROWNIAN_PARABOLIC)


# --------------------------------------------------------------------------
# Power-law jump process


@numba.njit(cache=True)
def _big_jump_kernel(rng, t0, dt, eps, gamma, mu, block_mass, budget):
    m = block_mass.shape[0]
    inc = np.zeros(m)
    shape = gamma - 2.0
    total = 0
    for i in range(m):
        sl = t0 + i * dt
        nb = rng.poisson(block_mass[i])
        for _ in range(nb):
            # x from density proportional to x^{1-gamma} e^{-x sl/mu} on (eps, inf)
            while True:
                x = eps * (1.0 - rng.random()) ** (-1.0 / shape)
                if rng.random() < math.exp(-x * sl / mu):
                    break
            off = rng.random() * dt
            if rng.random() < math.exp(-x * off / mu):
                inc[i] += x
                total += 1
        if total > budget:
            return inc, total
    return inc, total


@numba.njit(cache=True)
def _marginal_kernel(rng, size, t, eps, gamma, mu, mass, fine_eps):
    """Sum of jumps above ``fine_eps`` on ``[0, t]`` per sample, split at eps."""
    coarse = np.zeros(size)
    middle = np.zeros(size)
    shape = gamma - 2.0
    for p in range(size):
        nb = rng.poisson(mass)
        for _ in range(nb):
            x = fine_eps * (1.0 - rng.random()) ** (-1.0 / shape)
            s = rng.random() * t
            if rng.random() < math.exp(-x * s / mu):
                if x > eps:
                    coarse[p] += x
                else:
                    middle[p] += x
    return coarse, middle


@functools.lru_cache(maxsize=64)
def _chunk_tables(spec, t0, m, dt, eps):
    left = t0 + dt * np.arange(m)
    edges = t0 + dt * np.arange(m + 1)
    mass = dt * spec.big_jump_rate(left, eps)
    comp = np.diff(spec.compensator(edges, eps))
    var = np.diff(spec.small_jump_variance(edges, eps))
    drift = np.diff(drift_powerlaw(spec, edges))
    sd = np.sqrt(np.maximum(var, 0.0))
    for a in (mass, comp, sd, drift):
        a.setflags(write=False)
    return mass, comp, sd, drift


def powerlaw_increments(spec, t0, m, dt, eps, rng, budget=MAX_JUMPS):
    """Increments of ``X + A`` over ``m`` grid cells starting at ``t0``."""
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    mass, comp, sd, drift = _chunk_tables(spec, float(t0), int(m), float(dt), float(eps))
    if mass.sum() > budget:
        raise EpsTooSmall(f"about {mass.sum():.3g} jumps above eps = {eps}; budget {budget}")
    jumps, total = _big_jump_kernel(rng, float(t0), float(dt), float(eps), spec.gamma, spec.mu, mass, budget)
    if total > budget:
        raise EpsTooSmall(f"jump budget {budget} exceeded at eps = {eps}")
    return jumps - comp + sd * rng.standard_normal(m) + drift


def simulate_powerlaw_limit(spec, horizon, dt, eps, rng, budget=MAX_JUMPS):
    """Grid path of ``X + A`` on ``[0, horizon]``."""
    m = _steps(horizon, dt)
    inc = powerlaw_increments(spec, 0.0, m, dt, eps, rng, budget)
    return _path_from_increments(inc, dt, PathKind.POWER_LAW_LEVY)


def sample_powerlaw_marginal(spec, t, eps, size, rng, coarse_eps=None):
    """Draws of ``X(t)`` (without drift) for ``size`` independent paths.

    With ``coarse_eps > eps`` the same randomness also yields the
    ``coarse_eps`` approximation: jumps in ``(eps, coarse_eps]`` are swapped
    for extra Gaussian variance. Returns ``(fine, coarse)`` in that case.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    g = spec.gamma
    mass = t * spec.c / spec.mu * eps ** (2.0 - g) / (g - 2.0)
    if mass * size > MAX_JUMPS * 20:
        raise EpsTooSmall(f"about {mass * size:.3g} candidate jumps; lower size or raise eps")
    top = coarse_eps if coarse_eps is not None else eps
    big, mid = _marginal_kernel(rng, int(size), float(t), float(top), g, spec.mu, float(mass), float(eps))
    v_fine = float(spec.small_jump_variance(t, eps))
    z = rng.standard_normal(size)
    comp_fine = float(spec.compensator(t, eps))
    fine = big + mid - comp_fine + math.sqrt(v_fine) * z
    if coarse_eps is None:
        return fine
    v_coarse = float(spec.small_jump_variance(t, coarse_eps))
    z2 = rng.standard_normal(size)
    coarse = big - float(spec.compensator(t, coarse_eps)) + math.sqrt(v_fine) * z + math.sqrt(v_coarse - v_fine) * z2
    return fine, coarse


# --------------------------------------------------------------------------
# Adaptive excursion harvesting


@dataclass(frozen=True)
class Harvest:
    lengths: np.ndarray
    horizon: float
    censored_length: float
    capped: bool


def harvest_excursions(increments, dt, rng, top_k=3, start=10.0, chunk=5.0, cap=50.0, censor_ratio=0.1,
                       kind=PathKind.BROWNIAN_PARABOLIC):
    """Extend a path until its censored final excursion is shorter than
    ``censor_ratio`` times the longest complete one (or ``cap`` is hit).

    ``increments(t0, m, rng)`` must return ``m`` path increments from ``t0``.
    """
    parts = [np.zeros(1)]
    last = 0.0
    t = 0.0
    span = start
    while True:
        m = int(round(span / dt))
        inc = increments(t, m, rng)
        piece = last + np.cumsum(inc)
        parts.append(piece)
        last = float(piece[-1])
        t += m * dt
        path = LimitPath.from_values(np.concatenate(parts), dt, kind)
        ex = path_excursions(path)
        done = ex.complete_lengths()
        g1 = float(done[0]) if len(done) else 0.0
        cens = ex.censored_length
        capped = t >= cap - 1e-9
        if (g1 > 0 and cens < censor_ratio * g1) or capped:
            return Harvest(ex.top(top_k), t, cens, capped and not (g1 > 0 and cens < censor_ratio * g1))
        span = min(chunk, cap - t)


def brownian_harvest(mu, beta, dt, rng, **kw):
    def inc(t0, m, r):
        return brownian_increments(mu, beta, t0, m, dt, r)

    return harvest_excursions(inc, dt, rng, kind=PathKind.BROWNIAN_PARABOLIC, **kw)


def powerlaw_harvest(spec, dt, eps, rng, **kw):
    def inc(t0, m, r):
        return powerlaw_increments(spec, t0, m, dt, eps, r)

    return harvest_excursions(inc, dt, rng, kind=PathKind.POWER_LAW_LEVY, **kw)
