import math

import numpy as np
import pytest
from scipy import stats

from critgraph import degree_model as dm
from critgraph import poisson_field as pf
from critgraph.errors import HorizonExceedsN


def test_empty_horizon(law13, rng):
    f = pf.simulate_field(law13, 1000, 0.0, rng)
    assert len(f) == 0
    assert f.S(5.0) == 0


def test_horizon_exceeds_n(law13, rng):
    with pytest.raises(HorizonExceedsN):
        pf.simulate_field(law13, 100, 101, rng)
    with pytest.raises(HorizonExceedsN):
        pf.drift_A(law13, 100, 200)


def test_walk_S_example():
    f = pf.from_atoms([(3, 1.0), (1, 2.0)], n=10, horizon=3.0)
    S = pf.walk_S(f)
    assert S(1.5) == 1 and S(2.5) == 0 and S(0.5) == 0
    assert S(1.0) == 1  # right-continuous
    assert f.count(2.0) == 2


def test_empty_field_S_is_zero():
    f = pf.from_atoms([], n=10, horizon=3.0)
    assert np.all(f.S(np.linspace(0, 3, 7)) == 0)


def test_depoissonized_readout(law13, rng):
    n = 10**6
    f = pf.simulate_field(law13, n, 2 * n ** (2 / 3), rng)
    for t in (0.3, 1.0, 1.7):
        j = int(math.floor(t * n ** (2 / 3)))
        assert f.depoissonized(j) == np.sum(f.k[:j] - 2)
        assert f.S(f.s[j - 1]) == f.depoissonized(j)


@pytest.mark.parametrize("name", ["law13", "poisson1", "power35"])
def test_mark_probabilities_sum_to_one(name, request):
    law = request.getfixturevalue(name)
    kmax = 400 if law.is_power_law else law.support_max()
    n = 1000
    for frac in (0.0, 1e-3, 0.05, 0.4, 0.9):
        s = frac * dm.psi_sup(law) * n
        p = pf.mark_probabilities(law, n, s, kmax)
        total = p.sum()
        if law.is_power_law:
            # add the analytic tail beyond kmax
            from critgraph.special import power_tail_sum

            x = dm.psi(law, s / n)
            total += law.tail_c * power_tail_sum(1 - law.tail_gamma, x, kmax + 1) / dm.phi_prime(law, x)
        assert abs(1.0 - total) <= 1e-9


def test_marks_at_start_are_size_biased(law13, rng):
    # early atoms of a field with huge n have marks ~ k nu_k / mu
    ks = []
    for _ in range(400):
        f = pf.simulate_field(law13, 1e12, 50.0, rng)
        ks.append(f.k)
    k = np.concatenate(ks)
    obs = np.array([np.sum(k == 1), np.sum(k == 3)])
    p0 = pf.mark_probabilities(law13, 1e12, 0.0, 3)[[1, 3]]
    assert p0 == pytest.approx([0.5, 0.5])
    assert stats.chisquare(obs, p0 * obs.sum()).pvalue > 1e-3


@pytest.mark.parametrize("lo,hi", [(495.0, 505.0), (985.0, 995.0)])
def test_late_marks_match_law(law13, rng, lo, hi):
    # the mark law at s is k e^{-k psi} psi' nu_k; check by chi-square in a
    # thin window, including one where psi(s/n) is large
    n = 1000.0
    f_k = []
    for _ in range(3000):
        f = pf.simulate_field(law13, n, n, rng)
        f_k.append(f.k[(f.s > lo) & (f.s < hi)])
    k = np.concatenate(f_k)
    # arrivals are uniform in the window, so the expected law is the average
    p = np.mean([pf.mark_probabilities(law13, n, v, 3)[[1, 3]] for v in np.linspace(lo, hi, 201)], axis=0)
    obs = np.array([np.sum(k == 1), np.sum(k == 3)])
    assert stats.chisquare(obs, p * obs.sum()).pvalue > 1e-3


def test_count_mean_small(law13, rng):
    counts = [len(pf.simulate_field(law13, 1e4, 100.0, rng)) for _ in range(2000)]
    assert abs(np.mean(counts) - 100.0) <= 3 * math.sqrt(100.0 / 2000)


def test_drift_integrand_vanishes_at_zero(law13, power35):
    assert pf._drift_integrand(law13, 1e6, 0.0) == 0.0
    assert abs(pf._drift_integrand(power35, 1e6, 0.0)) < 1e-15
    # a_n(0) = E[D^2] / E[D] = 2
    assert law13.series(2, 0.0) / law13.series(1, 0.0) == pytest.approx(2.0)


@pytest.mark.parametrize("n", [1e4, 1e6])
@pytest.mark.parametrize("tau", [0.5, 2.0])
def test_quadrature_matches_antiderivative(law13, poisson1, n, tau):
    t = tau * n ** (2 / 3)
    for law in (law13, poisson1):
        assert pf.drift_A(law, n, t) == pytest.approx(pf.drift_A_closed(law, n, t), abs=1e-7)
        assert pf.variation_QV(law, n, t) == pytest.approx(pf.variation_QV_closed(law, n, t), abs=1e-6)


def test_poisson_variation_converges(poisson1):
    errs = [pf.rescaled_variation_error(poisson1, n) for n in (1e4, 1e5, 1e6)]
    assert errs[0] > errs[1] > errs[2]
    sups = [pf.rescaled_drift_sup(poisson1, n) for n in (1e4, 1e5, 1e6)]
    assert sups[0] > sups[1] > sups[2]


def test_drift_one_point(law13):
    n = 1e6
    val = n ** (-1 / 3) * pf.drift_A(law13, n, n ** (2 / 3))
    assert val == pytest.approx(-1 / 3, rel=0.05)
    v = n ** (-2 / 3) * pf.variation_QV(law13, n, n ** (2 / 3))
    assert v == pytest.approx(1.0, rel=0.05)


def test_power_law_drift_slope(power35):
    g = power35.tail_gamma
    n = 1e8
    ts = np.array([0.25, 0.5, 1.0, 2.0, 4.0])
    vals = [abs(n ** (-1 / (g - 1)) * pf.drift_A(power35, n, t * n ** ((g - 2) / (g - 1)))) for t in ts]
    slope = np.polyfit(np.log(ts), np.log(vals), 1)[0]
    assert abs(slope - (g - 2)) <= 0.05


def test_power_law_drift_approaches_limit(power35):
    from critgraph.limit_process import LevySpec, drift_powerlaw

    spec = LevySpec.from_law(power35)
    g = power35.tail_gamma
    ratios = [n ** (-1 / (g - 1)) * pf.drift_A_closed(power35, n, n ** ((g - 2) / (g - 1))) / drift_powerlaw(spec, 1.0)
              for n in (1e6, 1e8, 1e10)]
    assert abs(1 - ratios[0]) > abs(1 - ratios[1]) > abs(1 - ratios[2])
    assert abs(1 - ratios[2]) < 0.02


def test_max_mark(law13, rng):
    f = pf.from_atoms([(3, 1.0), (1, 2.0), (7, 4.0)], n=10, horizon=5.0)
    assert pf.max_mark(f, 0.5) == 0
    assert pf.max_mark(f, 2.0) == 3
    assert pf.max_mark(f, 5.0) == 7
