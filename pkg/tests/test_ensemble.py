import numpy as np
import pytest
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from critgraph import ensemble as en
from critgraph.errors import EmptySample, ReplicateFailure
from critgraph.unionfind import gnp_edges

from conftest import SEED

LAW13 = {"pmf": {"1": 0.75, "3": 0.25}}


def _cfg(**kw):
    base = dict(law=LAW13, n_list=(200, 400), replicates=12, seed=SEED, mode="multigraph")
    base.update(kw)
    return en.EnsembleConfig(**base)


def test_ks_examples():
    assert en.ks_distance([1, 2, 3], [1, 2, 3]) == 0.0
    assert en.ks_distance([0.0], [1.0]) == 1.0
    assert en.ks_distance([1, 2, 3, 4], [3, 4, 5, 6]) == 0.5
    assert en.ks_distance([0, 0, 0], [1, 1, 1]) == 1.0
    assert en.ks_distance([1, 2], [1.5]) == 0.5
    with pytest.raises(EmptySample):
        en.ks_distance([], [1.0])


def test_ks_matches_direct_sup(rng):
    a, b = rng.normal(size=300), rng.normal(0.2, size=250)
    fa, fb = en.empirical_cdf(a), en.empirical_cdf(b)
    pts = np.concatenate((a, b))
    assert en.ks_distance(a, b) == pytest.approx(np.max(np.abs(fa(pts) - fb(pts))), abs=1e-15)


def test_ecdf():
    f = en.empirical_cdf([3.0, 1.0, 2.0, 2.0])
    assert f(0.5) == 0.0 and f(1.0) == 0.25 and f(2.0) == 0.75 and f(3.0) == 1.0
    t = np.linspace(0, 4, 50)
    assert np.all(np.diff(f(t)) >= 0)
    assert f.jumps.tolist() == [1.0, 2.0, 3.0]
    with pytest.raises(EmptySample):
        en.empirical_cdf([])


def test_config_roundtrip():
    c = _cfg()
    again = en.EnsembleConfig.from_dict(c.to_dict())
    assert again == c and again.config_hash() == c.config_hash()
    assert en.EnsembleConfig.from_dict({"law": LAW13, "n": 500}).n_list == (500,)
    with pytest.raises(ValueError):
        _cfg(mode="bogus")
    with pytest.raises(ValueError):
        _cfg(replicates=0)


@pytest.mark.parametrize("mode", ["multigraph", "simple", "poissonized", "limit"])
def test_determinism(mode):
    kw = dict(mode=mode)
    if mode in ("poissonized", "limit"):
        kw.update(dt=1e-2, horizon=5.0, cap=10.0, n_list=(10**4,), replicates=4)
    a = en.run_ensemble(_cfg(**kw), workers=1)
    b = en.run_ensemble(_cfg(**kw), workers=1)
    assert a.to_json() == b.to_json() and a.to_csv() == b.to_csv()
    c = en.run_ensemble(_cfg(**kw).with_(seed=SEED + 1), workers=1)
    assert c.to_json() != a.to_json()


def test_single_replicate_byte_identical():
    cfg = en.EnsembleConfig(law=LAW13, n_list=(10,), replicates=1, seed=SEED)
    assert en.run_ensemble(cfg).to_json() == en.run_ensemble(cfg).to_json()


def test_worker_count_invariance():
    a = en.run_ensemble(_cfg(), workers=1)
    b = en.run_ensemble(_cfg(), workers=3)
    assert a.to_json() == b.to_json()


def test_worker_budget_env(monkeypatch):
    monkeypatch.setenv(en.WORKERS_ENV, "3")
    assert en.worker_budget() == 3
    monkeypatch.delenv(en.WORKERS_ENV)
    assert en.worker_budget() >= 1


def test_records_are_sorted_and_rescaled():
    s = en.run_ensemble(_cfg(), workers=1)
    for n in s.config.n_list:
        t = s.tops[n]
        assert t.shape == (12, 3)
        assert np.all(np.diff(t, axis=1) <= 0)
        # rescaled sizes are integers times n^{-2/3}
        k = t * n ** (2 / 3)
        assert np.allclose(k, np.round(k), atol=1e-9)


def test_forced_loop_defect_table():
    s = en.run_ensemble(_cfg(degrees=(2,), n_list=(1,), replicates=5), workers=1)
    row = s.defect_table()[0]
    assert row["nonsimple_rate"] == 1.0
    assert row["p_T_le_threshold"] == 1.0
    assert row["early_fraction_of_nonsimple"] == 1.0


def test_simple_mode_failure_carries_seed():
    with pytest.raises(ReplicateFailure) as info:
        en.run_ensemble(_cfg(mode="simple", degrees=(2,), n_list=(1,), replicates=2, max_attempts=3), workers=1)
    assert info.value.seed == SEED and info.value.index == 0


def test_simple_mode_acceptance_rate():
    s = en.run_ensemble(_cfg(mode="simple"), workers=1)
    for n in s.config.n_list:
        assert 0 < s.acceptance_rate(n) <= 1
        assert all(a["attempts"] >= 1 for a in s.aux[n])


def test_er_oracle_reproduces_components():
    cfg = en.EnsembleConfig(law=None, n_list=(3000,), replicates=3, seed=SEED, mode="er_oracle")
    s = en.run_ensemble(cfg, workers=1)
    for i in range(3):
        rng = en.replicate_rng(SEED, i)
        e = gnp_edges(3000, 1 / 3000, rng)
        g = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(3000, 3000))
        _, lab = connected_components(g, directed=False)
        top = np.sort(np.bincount(lab))[::-1][:3] * 3000 ** (-2 / 3)
        assert np.allclose(s.tops[3000][i], top)


def test_csv_header():
    s = en.run_ensemble(_cfg(), workers=1)
    first = s.to_csv().splitlines()[0]
    assert first == f"# config_hash={s.config.config_hash()} seed={SEED} mode=multigraph"


def test_conjecture_probe_banner(power35):
    cfg = en.EnsembleConfig(law={"power_law": {"gamma": 3.5, "k_min": 3}}, n_list=(300,), replicates=4,
                            seed=SEED, dt=1e-2, horizon=5.0, cap=10.0)
    out = en.conjecture_probe(cfg)
    assert out["banner"] == en.EXPLORATORY_BANNER
    assert out["simple"].label == en.EXPLORATORY_BANNER
    assert en.EXPLORATORY_BANNER in out["simple"].to_csv()
    row = out["rows"][0]
    assert 0 <= row["ks_simple_vs_limit"] <= 1 and 0 < row["acceptance_rate"] <= 1
