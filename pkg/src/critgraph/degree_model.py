"""Critical degree distributions: validation, calibration, sampling, and the
Laplace-transform machinery (L, phi = 1 - L, psi = phi^{-1}).

A :class:`DegreeLaw` is either finitely supported (the finite-third-moment
regime) or a finite head plus an exact power tail ``c * k**-gamma`` for
``k >= k_min`` (the power-law regime, ``3 < gamma < 4``).
"""

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sp

from .errors import (
    DegenerateTwoRegular,
    EvenSumTimeout,
    GammaOutOfRange,
    Infeasible,
    LawError,
    NotCritical,
    NotNormalized,
    PsiDomain,
)
from .special import power_tail_sum

NORM_TOL = 1e-12
CRIT_TOL = 1e-10
PSI_TOL = 1e-12
PSI_NEWTON_MAX = 100
EVEN_SUM_ATTEMPTS = 10_000


class Regime(enum.Enum):
    FINITE_THIRD_MOMENT = "FiniteThirdMoment"
    POWER_LAW = "PowerLaw"


# --------------------------------------------------------------------------
# Samplers


class AliasTable:
    """Walker/Vose alias table over ``0..m-1``."""

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float)
        m = len(w)
        if m == 0 or w.sum() <= 0:
            raise ValueError("alias table needs positive total weight")
        scaled = w * m / w.sum()
        prob = np.ones(m)
        alias = np.arange(m)
        small = [i for i in range(m) if scaled[i] < 1.0]
        large = [i for i in range(m) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] -= 1.0 - scaled[s]
            (small if scaled[g] < 1.0 else large).append(g)
        # leftovers are 1 up to rounding
        self.prob = prob
        self.alias = alias
        self.size = m

    def sample(self, rng, size):
        idx = rng.integers(0, self.size, size=size)
        keep = rng.random(size) < self.prob[idx]
        return np.where(keep, idx, self.alias[idx])


def sample_power_tail(rng, size, exponent, k_start):
    """Exact draws of ``k >= k_start`` with ``P(k) ∝ k**-exponent``.

    Proposal ``floor(Y)`` with ``Y`` continuous Pareto on ``[k_start, inf)``;
    the target/proposal ratio decreases in ``k`` so the ratio at ``k_start``
    bounds it.
    """
    e = float(exponent)

    def ratio(k):
        k = np.asarray(k, dtype=float)
        cell = (k ** (1.0 - e) - (k + 1.0) ** (1.0 - e)) / (e - 1.0)
        return k ** (-e) / cell

    r0 = float(ratio(k_start))
    out = np.empty(size, dtype=np.int64)
    todo = np.arange(size)
    while todo.size:
        u = rng.random(todo.size)
        y = k_start * (1.0 - u) ** (-1.0 / (e - 1.0))
        k = np.floor(np.minimum(y, 9.0e18)).astype(np.int64)
        acc = rng.random(todo.size) * r0 <= ratio(k)
        out[todo[acc]] = k[acc]
        todo = todo[~acc]
    return out


class _HeadTailSampler:
    """Mixture of an alias table on the head and an exact power tail."""

    def __init__(self, head_weights, tail_mass=0.0, tail_exponent=None, k_start=None):
        weights = list(head_weights)
        self.head_len = len(weights)
        self.has_tail = tail_mass > 0.0
        if self.has_tail:
            weights.append(tail_mass)
        self.table = AliasTable(weights)
        self.tail_exponent = tail_exponent
        self.k_start = k_start

    def sample(self, rng, size):
        idx = self.table.sample(rng, size).astype(np.int64)
        if self.has_tail:
            in_tail = idx == self.head_len
            m = int(in_tail.sum())
            if m:
                idx[in_tail] = sample_power_tail(rng, m, self.tail_exponent, self.k_start)
        return idx


# --------------------------------------------------------------------------
# The law


@dataclass(frozen=True, eq=False)
class DegreeLaw:
    """A degree distribution with cached moments.

    ``head[k]`` is the probability of degree ``k`` for ``k < len(head)``; in
    the power-law regime the tail ``tail_c * k**-tail_gamma`` starts at
    ``k_min == len(head)``.
    """

    head: np.ndarray
    regime: Regime
    mu: float
    beta: float
    tail_c: float = 0.0
    tail_gamma: float = None
    k_min: int = None
    critical: bool = True
    source: dict = field(default=None, repr=False)

    def __post_init__(self):
        self.head.setflags(write=False)

    # -- basic properties -------------------------------------------------

    @property
    def is_power_law(self):
        return self.regime is Regime.POWER_LAW

    @property
    def zero_mass(self):
        return float(self.head[0]) if len(self.head) else 0.0

    def pmf(self, k):
        k = int(k)
        if k < 0:
            return 0.0
        if k < len(self.head):
            return float(self.head[k])
        if self.is_power_law:
            return self.tail_c * k ** (-self.tail_gamma)
        return 0.0

    def support_max(self):
        return math.inf if self.is_power_law else len(self.head) - 1

    def total_mass(self):
        s = float(self.head.sum())
        if self.is_power_law:
            s += self.tail_c * float(sp.zeta(self.tail_gamma, self.k_min))
        return s

    def moment(self, j):
        return self.series(j, 0.0)

    def criticality_residual(self):
        return self.series(2, 0.0) - 2.0 * self.series(1, 0.0)

    def spec_dict(self):
        if self.source is not None:
            return self.source
        return {"pmf": {str(k): float(p) for k, p in enumerate(self.head) if p > 0}}

    def law_hash(self):
        blob = json.dumps(self.spec_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def report(self):
        """Plain dict summary used by the CLI ``validate`` command."""
        return {
            "regime": self.regime.value,
            "mu": self.mu,
            "beta": self.beta,
            "tail_c": self.tail_c if self.is_power_law else None,
            "tail_gamma": self.tail_gamma,
            "k_min": self.k_min,
            "zero_mass": self.zero_mass,
            "total_mass_residual": self.total_mass() - 1.0,
            "criticality_residual": self.criticality_residual(),
            "law_hash": self.law_hash(),
        }

    # -- transforms -------------------------------------------------------

    def series(self, j, t, one_minus=False):
        """``sum_k k**j w(k t) nu_k`` with ``w = exp(-x)`` or ``1 - exp(-x)``."""
        t = float(t)
        k = np.arange(len(self.head), dtype=float)
        kj = k**j if j else np.ones_like(k)
        if j > 0:
            kj[0] = 0.0
        w = -np.expm1(-k * t) if one_minus else np.exp(-k * t)
        total = float(np.dot(kj * w, self.head))
        if self.is_power_law:
            total += self.tail_c * power_tail_sum(j - self.tail_gamma, t, self.k_min, one_minus)
        return total

    def series_array(self, j, t, one_minus=False):
        t = np.asarray(t, dtype=float)
        if not self.is_power_law:
            k = np.arange(len(self.head), dtype=float)
            kj = k**j if j else np.ones_like(k)
            if j > 0:
                kj[0] = 0.0
            x = np.multiply.outer(t, k)
            w = -np.expm1(-x) if one_minus else np.exp(-x)
            return w @ (kj * self.head)
        flat = np.array([self.series(j, tt, one_minus) for tt in t.ravel()])
        return flat.reshape(t.shape)

    def _sample_head_tail(self, size_biased):
        if size_biased:
            k = np.arange(len(self.head), dtype=float)
            head = k * self.head / self.mu
            tail = 0.0
            if self.is_power_law:
                tail = self.tail_c * float(sp.zeta(self.tail_gamma - 1.0, self.k_min)) / self.mu
                return _HeadTailSampler(head, tail, self.tail_gamma - 1.0, self.k_min)
            return _HeadTailSampler(head)
        if self.is_power_law:
            tail = self.tail_c * float(sp.zeta(self.tail_gamma, self.k_min))
            return _HeadTailSampler(self.head, tail, self.tail_gamma, self.k_min)
        return _HeadTailSampler(self.head)

    @property
    def sampler(self):
        s = self.__dict__.get("_sampler")
        if s is None:
            s = self._sample_head_tail(False)
            object.__setattr__(self, "_sampler", s)
        return s

    @property
    def size_biased_sampler(self):
        s = self.__dict__.get("_sb_sampler")
        if s is None:
            s = self._sample_head_tail(True)
            object.__setattr__(self, "_sb_sampler", s)
        return s


# --------------------------------------------------------------------------
# Construction


def _parse_pmf(raw):
    pmf = {}
    for key, p in raw.items():
        k = int(key)
        p = float(p)
        if k < 0:
            raise LawError(f"degree {k} is negative", invariant="support", residual=k)
        if p < 0 or not math.isfinite(p):
            raise LawError(f"probability of degree {k} is {p}", invariant="nonnegative", residual=p)
        pmf[k] = pmf.get(k, 0.0) + p
    if not pmf:
        raise LawError("empty pmf", invariant="support")
    head = np.zeros(max(pmf) + 1)
    for k, p in pmf.items():
        head[k] = p
    return head


def _finite_law(head, require_critical=True, source=None):
    k = np.arange(len(head), dtype=float)
    total = float(head.sum())
    if abs(total - 1.0) > NORM_TOL:
        raise NotNormalized(
            f"probabilities sum to {total!r}", invariant="sum nu_k = 1", residual=total - 1.0
        )
    mu = float(np.dot(k, head))
    beta = float(np.dot(k * (k - 1) * (k - 2), head))
    resid = float(np.dot(k * (k - 2), head))
    if require_critical:
        if len(head) > 2 and head[2] >= 1.0 - NORM_TOL:
            raise DegenerateTwoRegular(
                "nu_2 = 1: every component is a cycle", invariant="nu_2 < 1", residual=float(head[2])
            )
        if abs(resid) > CRIT_TOL:
            raise NotCritical(
                f"sum k(k-2) nu_k = {resid!r}", invariant="sum k(k-2) nu_k = 0", residual=resid
            )
        if beta <= 0.0:
            raise DegenerateTwoRegular(
                "support inside {0, 2}: every component is a cycle",
                invariant="beta > 0",
                residual=beta,
            )
    return DegreeLaw(
        head=head,
        regime=Regime.FINITE_THIRD_MOMENT,
        mu=mu,
        beta=beta,
        critical=require_critical or abs(resid) <= CRIT_TOL,
        source=source,
    )


def from_pmf(raw, require_critical=True):
    """Build a finitely supported law from ``{k: p}`` (keys may be strings)."""
    head = _parse_pmf(raw)
    source = {"pmf": {str(k): float(p) for k, p in enumerate(head) if p > 0}}
    return _finite_law(head, require_critical=require_critical, source=source)


def poisson_law(mean=1.0, cutoff=1e-18):
    """Poisson degrees, truncated where the pmf drops below ``cutoff``.

    Degree 0 keeps its mass; such vertices are isolated.
    """
    kmax = int(mean) + 1
    while math.exp(-mean + kmax * math.log(mean) - math.lgamma(kmax + 1)) >= cutoff:
        kmax += 1
    k = np.arange(kmax + 1)
    head = np.exp(-mean + k * math.log(mean) - sp.gammaln(k + 1))
    head /= head.sum()
    return _finite_law(head, source={"poisson": {"mean": float(mean)}})


def _power_tail_moments(gamma, k_min):
    s0 = float(sp.zeta(gamma, k_min))
    s1 = float(sp.zeta(gamma - 1.0, k_min))
    s2 = float(sp.zeta(gamma - 2.0, k_min))
    return s0, s1, s2


def _check_gamma(gamma):
    if not 3.0 < gamma < 4.0:
        raise GammaOutOfRange(f"gamma = {gamma} outside (3, 4)", invariant="3 < gamma < 4", residual=gamma)


def calibrate_power_law(gamma, k_min=3):
    """Critical law with ``nu_k = c k**-gamma`` for ``k >= k_min``.

    ``nu_1`` absorbs criticality and ``nu_2`` normalization; ``c`` is the
    largest value that keeps both in ``[0, 1)``, which makes ``nu_2 = 0``.
    """
    gamma = float(gamma)
    _check_gamma(gamma)
    if k_min < 3:
        raise Infeasible("k_min must be at least 3", invariant="k_min >= 3", residual=k_min)
    s0, s1, s2 = _power_tail_moments(gamma, k_min)
    crit = s2 - 2.0 * s1  # sum_{k>=k_min} k(k-2) k^-gamma
    if crit <= 0 or s0 + crit <= 0:
        raise Infeasible("no positive tail constant", invariant="c > 0")
    c = 1.0 / (crit + s0)
    nu1 = c * crit
    nu2 = 1.0 - nu1 - c * s0
    if abs(nu2) < 1e-15:
        nu2 = 0.0
    if not (0.0 <= nu1 < 1.0 and 0.0 <= nu2 < 1.0):
        raise Infeasible(f"nu_1 = {nu1}, nu_2 = {nu2}", invariant="nu_1, nu_2 in [0, 1)")
    head = np.zeros(k_min)
    head[1] = nu1
    head[2] = nu2
    return _power_law(head, c, gamma, k_min, source={"power_law": {"gamma": gamma, "k_min": int(k_min)}})


def _power_law(head, c, gamma, k_min, source=None):
    _check_gamma(gamma)
    if c <= 0:
        raise LawError("tail constant must be positive", invariant="c > 0", residual=c)
    s0, s1, s2 = _power_tail_moments(gamma, k_min)
    k = np.arange(len(head), dtype=float)
    total = float(head.sum()) + c * s0
    if abs(total - 1.0) > NORM_TOL:
        raise NotNormalized(f"mass {total!r}", invariant="sum nu_k = 1", residual=total - 1.0)
    mu = float(np.dot(k, head)) + c * s1
    resid = float(np.dot(k * (k - 2), head)) + c * (s2 - 2.0 * s1)
    if abs(resid) > CRIT_TOL:
        raise NotCritical(f"sum k(k-2) nu_k = {resid!r}", invariant="sum k(k-2) nu_k = 0", residual=resid)
    head = np.array(head, dtype=float)
    return DegreeLaw(
        head=head,
        regime=Regime.POWER_LAW,
        mu=mu,
        beta=math.inf,
        tail_c=float(c),
        tail_gamma=float(gamma),
        k_min=int(k_min),
        source=source,
    )


def validate(raw):
    """Validate a law specification and return a :class:`DegreeLaw`.

    Accepts a ``{k: p}`` mapping, or a JSON-style dict with one of the keys
    ``pmf``, ``power_law`` (``gamma``, ``k_min`` and optionally ``c`` with a
    ``head`` pmf), or ``poisson``.
    """
    if isinstance(raw, DegreeLaw):
        return raw
    if isinstance(raw, str):
        raw = json.loads(raw)
    if "power_law" in raw:
        spec = raw["power_law"]
        gamma = float(spec["gamma"])
        k_min = int(spec.get("k_min", 3))
        if "c" not in spec:
            return calibrate_power_law(gamma, k_min)
        head = np.zeros(k_min)
        for key, p in spec.get("head", {}).items():
            kk = int(key)
            if not 0 <= kk < k_min:
                raise LawError(f"head degree {kk} outside [0, k_min)", invariant="support")
            head[kk] = float(p)
        return _power_law(head, float(spec["c"]), gamma, k_min, source={"power_law": dict(spec)})
    if "poisson" in raw:
        return poisson_law(float(raw["poisson"].get("mean", 1.0)))
    if "pmf" in raw:
        raw = raw["pmf"]
    return from_pmf(raw)


# --------------------------------------------------------------------------
# Sampling


def sample_degrees(law, n, rng, max_attempts=EVEN_SUM_ATTEMPTS):
    """``n`` i.i.d. degrees conditioned on an even sum (whole-vector rejection)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    for _ in range(max_attempts):
        d = law.sampler.sample(rng, n)
        if int(d.sum()) % 2 == 0:
            return d
    raise EvenSumTimeout(f"no even-sum degree vector after {max_attempts} attempts (n = {n})")


def sample_size_biased(law, size, rng):
    """Draws from ``k nu_k / mu``."""
    return law.size_biased_sampler.sample(rng, size)


# --------------------------------------------------------------------------
# Laplace transform, phi, psi


def laplace(law, t):
    if t < 0:
        raise ValueError("t must be nonnegative")
    return law.series(0, t)


def phi(law, t):
    """``1 - L(t)``, computed without cancellation."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return law.series(0, t, one_minus=True)


def phi_prime(law, t):
    return law.series(1, t)


def laplace_derivative(law, order, t):
    """``L^{(order)}(t) = sum (-k)^order e^{-kt} nu_k``."""
    return (-1) ** order * law.series(order, t)


def psi_sup(law):
    """Supremum of the domain of psi, ``phi(inf) = 1 - nu_0``."""
    return 1.0 - law.zero_mass


def psi(law, u):
    """Inverse of phi: safeguarded Newton with bisection fallback."""
    u = float(u)
    if u < 0 or u >= psi_sup(law):
        raise PsiDomain(f"u = {u} outside [0, {psi_sup(law)})")
    if u == 0.0:
        return 0.0
    lo, hi = 0.0, max(u / law.mu, 1e-300)
    while phi(law, hi) <= u:
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise PsiDomain(f"bracket search failed for u = {u}")
    x = u / law.mu  # phi is concave, so phi(u/mu) <= u
    x = min(max(x, lo), hi)
    for _ in range(PSI_NEWTON_MAX):
        f = phi(law, x) - u
        if abs(f) <= PSI_TOL * max(1.0, u) and abs(f) <= PSI_TOL:
            return x
        if f < 0:
            lo = max(lo, x)
        else:
            hi = min(hi, x)
        step = f / phi_prime(law, x)
        nx = x - step
        if not (lo <= nx <= hi) or step == 0.0:
            nx = 0.5 * (lo + hi)
        if nx == x:
            return x
        x = nx
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if phi(law, mid) < u:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def psi_array(law, u):
    """Vectorized psi for finitely supported laws; falls back to scalar."""
    u = np.asarray(u, dtype=float)
    if law.is_power_law:
        return np.vectorize(lambda v: psi(law, v), otypes=[float])(u)
    if np.any(u < 0) or np.any(u >= psi_sup(law)):
        raise PsiDomain("u outside the domain of psi")
    x = u / law.mu
    for _ in range(PSI_NEWTON_MAX):
        f = law.series_array(0, x, one_minus=True) - u
        if np.all(np.abs(f) <= PSI_TOL):
            break
        x = x - f / law.series_array(1, x)
        x = np.maximum(x, 0.0)
    return x


def psi_prime(law, u):
    """``psi'(u) = 1 / phi'(psi(u))``."""
    return 1.0 / phi_prime(law, psi(law, u))
