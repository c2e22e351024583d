"""Scalar special functions for power tails.

Upper incomplete gamma for arbitrary real shape, and sums of the form
``sum_{k>=K} k**p * exp(-k t)`` (or with ``1 - exp(-k t)``) evaluated by a
short direct sum followed by an Euler-Maclaurin remainder.
"""

import math

import numpy as np
from scipy import special as sp

# Bernoulli numbers B_2, B_4, B_6 for the Euler-Maclaurin correction.
_EM_BERNOULLI = ((2, 1.0 / 6.0), (4, -1.0 / 30.0), (6, 1.0 / 42.0))

# Direct summation length before switching to the remainder formula.
DIRECT_TERMS = 512


def upper_gamma(a, z):
    """Unregularized upper incomplete gamma ``Gamma(a, z)`` for real ``a``.

    Negative non-integer shapes are reached by the downward recurrence
    ``Gamma(a, z) = (Gamma(a + 1, z) - z**a e**-z) / a``.
    """
    z = np.asarray(z, dtype=float)
    if a > 0:
        return sp.gamma(a) * sp.gammaincc(a, z)
    if float(a).is_integer():
        raise ValueError("upper_gamma: non-positive integer shape not supported")
    m = int(math.floor(-a)) + 1
    b = a + m
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        val = sp.gamma(b) * sp.gammaincc(b, z)
        for _ in range(m):
            b -= 1.0
            val = (val - np.power(z, b) * np.exp(-z)) / b
    return val


def lower_gamma_reg(a, z):
    """Regularized lower incomplete gamma, ``a > 0``."""
    return sp.gammainc(a, z)


def _falling(p, i):
    out = 1.0
    for j in range(i):
        out *= p - j
    return out


def _deriv_pow_exp(p, t, x, r):
    """r-th derivative of ``x**p * exp(-t x)``."""
    total = 0.0
    for i in range(r + 1):
        total += math.comb(r, i) * _falling(p, i) * x ** (p - i) * (-t) ** (r - i)
    return total * math.exp(-t * x)


def _deriv_pow(p, x, r):
    return _falling(p, r) * x ** (p - r)


def _integral_pow_exp(p, t, K):
    """``int_K^inf x**p e^{-t x} dx``."""
    if t == 0.0:
        if p >= -1.0:
            return math.inf
        return K ** (p + 1.0) / (-p - 1.0)
    return float(t ** (-p - 1.0) * upper_gamma(p + 1.0, K * t))


def _em_tail(p, t, K, one_minus):
    """Euler-Maclaurin estimate of ``sum_{k>=K} f(k)``."""
    if one_minus:
        # f = x^p - x^p e^{-tx}; both pieces converge because p < -1 here.
        if p >= -1.0:
            return math.inf
        integral = K ** (p + 1.0) / (-p - 1.0) - _integral_pow_exp(p, t, K)
        f0 = K**p * -math.expm1(-t * K)

        def deriv(r):
            return _deriv_pow(p, K, r) - _deriv_pow_exp(p, t, K, r)
    else:
        integral = _integral_pow_exp(p, t, K)
        if math.isinf(integral):
            return math.inf
        f0 = K**p * math.exp(-t * K)

        def deriv(r):
            return _deriv_pow_exp(p, t, K, r)

    total = integral + 0.5 * f0
    for order, b in _EM_BERNOULLI:
        total -= b / math.factorial(order) * deriv(order - 1)
    return total


def power_tail_sum(p, t, K, one_minus=False, direct=DIRECT_TERMS):
    """Return ``sum_{k>=K} k**p * w(k t)``.

    ``w(x) = exp(-x)`` by default, ``1 - exp(-x)`` when ``one_minus``.
    Returns ``inf`` for divergent sums.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        if one_minus:
            return 0.0
        if p >= -1.0:
            return math.inf
        return float(sp.zeta(-p, K))
    k = np.arange(K, K + direct, dtype=float)
    if one_minus:
        head = float(np.sum(k**p * -np.expm1(-k * t)))
    else:
        head = float(np.sum(k**p * np.exp(-k * t)))
    return head + _em_tail(p, t, float(K + direct), one_minus)
