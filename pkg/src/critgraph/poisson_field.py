"""The Poissonized discovery model.

Atoms ``(k, s)`` arrive as a unit-rate Poisson process in ``s``; the atom
at time ``s`` carries degree ``k`` with probability
``p_k(s) = k exp(-k psi(s/n)) psi'(s/n) nu_k``. The path
``S_n(t) = sum_{s <= t} (k - 2)`` plays the role of the cycle-free walk.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import degree_model as dm
from .errors import HorizonExceedsN, QuadratureFailure

QUAD_EPSABS = 1e-8
_MARK_BATCH = 4096


@dataclass(frozen=True, eq=False)
class PoissonFieldSample:
    """Atoms of the field on ``(0, horizon)``, sorted by time."""

    k: np.ndarray
    s: np.ndarray
    n: float
    horizon: float

    def __len__(self):
        return len(self.s)

    @property
    def atoms(self):
        return list(zip(self.k.tolist(), self.s.tolist()))

    def count(self, t):
        """``N_n(t)``, the number of atoms in ``(0, t]``."""
        return np.searchsorted(self.s, t, side="right")

    def S(self, t):
        """Right-continuous ``S_n(t)``; accepts scalars or arrays."""
        cs = np.concatenate(([0], np.cumsum(self.k - 2)))
        return cs[self.count(t)]

    def depoissonized(self, j):
        """``S_n(T^j)`` where ``T^j`` is the j-th arrival (``T^0 = 0``)."""
        j = np.asarray(j)
        if np.any(j > len(self)):
            raise IndexError("fewer than j atoms in the field")
        cs = np.concatenate(([0], np.cumsum(self.k - 2)))
        return cs[j]


def from_atoms(atoms, n, horizon):
    atoms = sorted(atoms, key=lambda a: a[1])
    k = np.array([a[0] for a in atoms], dtype=np.int64)
    s = np.array([a[1] for a in atoms], dtype=float)
    if np.any(np.diff(s) <= 0):
        raise ValueError("atom times must be strictly increasing")
    if np.any(k < 1):
        raise ValueError("atom marks must be positive")
    return PoissonFieldSample(k=k, s=s, n=n, horizon=horizon)


def walk_S(field):
    return field.S


def mark_probabilities(law, n, s, kmax):
    """``p_k(s)`` for ``k = 0..kmax`` (index 0 is always zero)."""
    x = dm.psi(law, s / n)
    k = np.arange(kmax + 1, dtype=float)
    nu = np.array([law.pmf(i) for i in range(kmax + 1)])
    return k * np.exp(-k * x) * nu / dm.phi_prime(law, x)


def _psi_times(law, u):
    return dm.psi_array(law, u)


def simulate_field(law, n, horizon, rng):
    """Unit-rate arrivals on ``(0, horizon)`` with independent degree marks.

    A mark is drawn from the size-biased law and kept with probability
    ``exp(-(k - k0) psi(s/n))``, ``k0`` the smallest positive degree in the
    support; the accepted mark has law ``p_k(s)`` exactly and the acceptance
    rate stays bounded below even when ``psi`` is large.
    """
    if horizon > n:
        raise HorizonExceedsN(f"horizon {horizon} exceeds n = {n}")
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if horizon == 0:
        return PoissonFieldSample(np.zeros(0, np.int64), np.zeros(0), n, 0.0)
    count = rng.poisson(horizon)
    s = np.sort(rng.uniform(0.0, horizon, size=count))
    x = _psi_times(law, s / n)
    k = np.empty(count, dtype=np.int64)
    k0 = next(i for i in range(1, 10**6) if law.pmf(i) > 0)
    pending = np.arange(count)
    while len(pending):
        draw = dm.sample_size_biased(law, len(pending), rng)
        keep = rng.random(len(pending)) < np.exp(-(draw - k0) * x[pending])
        k[pending[keep]] = draw[keep]
        pending = pending[~keep]
    return PoissonFieldSample(k=k, s=s, n=n, horizon=float(horizon))


def max_mark(field, t):
    """Largest mark among atoms with ``s <= t`` (diagnostic only)."""
    m = field.count(t)
    return int(field.k[:m].max()) if m else 0


# --------------------------------------------------------------------------
# Drift and quadratic variation


def _drift_integrand(law, n, s):
    # a_n(s) - 2 = sum k(k-2) e^{-k psi} nu_k / sum k e^{-k psi} nu_k, with the
    # numerator rewritten through criticality to avoid cancellation.
    x = dm.psi(law, s / n)
    num = law.series(2, x, one_minus=True) - 2.0 * law.series(1, x, one_minus=True)
    return -num / law.series(1, x)


def _variation_integrand(law, n, s):
    x = dm.psi(law, s / n)
    num = law.series(3, x) - 4.0 * law.series(2, x) + 4.0 * law.series(1, x)
    return num / law.series(1, x)


def _integrate(f, t, what):
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 0.0
    val, err = integrate.quad(f, 0.0, t, epsabs=QUAD_EPSABS, epsrel=1e-10, limit=200)
    if not math.isfinite(val) or err > 10 * QUAD_EPSABS + 1e-10 * abs(val):
        raise QuadratureFailure(f"{what}: estimate {val}, error {err}")
    return val


def drift_A(law, n, t):
    """``A_n(t) = int_0^t (a_n(s) - 2) ds`` by adaptive quadrature."""
    if t > n:
        raise HorizonExceedsN(f"t = {t} exceeds n = {n}")
    return _integrate(lambda s: _drift_integrand(law, n, s), t, "drift")


def variation_QV(law, n, t):
    """``<M_n>(t) = int_0^t b_n(s) ds`` by adaptive quadrature."""
    if t > n:
        raise HorizonExceedsN(f"t = {t} exceeds n = {n}")
    return _integrate(lambda s: _variation_integrand(law, n, s), t, "variation")


def drift_A_closed(law, n, t):
    """Antiderivative form ``n sum (k-2) nu_k (1 - e^{-k psi(t/n)})``."""
    x = dm.psi(law, t / n)
    return n * (law.series(1, x, one_minus=True) - 2.0 * law.series(0, x, one_minus=True))


def variation_QV_closed(law, n, t):
    """``n sum (k-2)^2 nu_k (1 - e^{-k psi(t/n)})``."""
    x = dm.psi(law, t / n)
    return n * (
        law.series(2, x, one_minus=True)
        - 4.0 * law.series(1, x, one_minus=True)
        + 4.0 * law.series(0, x, one_minus=True)
    )


def rescaled_drift_sup(law, n, t0=2.0, points=20, closed=False):
    """``sup_t |n^{-1/3} A_n(t n^{2/3}) + (beta/2mu^2) t^2|`` on a grid."""
    f = drift_A_closed if closed else drift_A
    ts = np.linspace(t0 / points, t0, points)
    coef = law.beta / (2.0 * law.mu**2)
    vals = np.array([n ** (-1.0 / 3.0) * f(law, n, t * n ** (2.0 / 3.0)) for t in ts])
    return float(np.max(np.abs(vals + coef * ts**2)))


def rescaled_variation_error(law, n, t0=2.0, closed=False):
    """Relative error of ``n^{-2/3} <M_n>(t0 n^{2/3})`` against ``(beta/mu) t0``."""
    f = variation_QV_closed if closed else variation_QV
    target = law.beta / law.mu * t0
    val = n ** (-2.0 / 3.0) * f(law, n, t0 * n ** (2.0 / 3.0))
    return abs(val - target) / target
