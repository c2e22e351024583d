import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from critgraph import degree_model as dm
from critgraph import explorer as ex
from critgraph import limit_process as lp
from critgraph.errors import NotSorted
from critgraph.excursions import excursions, l2_distance, path_excursions, reflect
from critgraph.paths import LimitPath, PathKind


def _path(values, dt=1.0):
    return LimitPath.from_values(np.asarray(values, dtype=float), dt, PathKind.RESCALED_WALK)


def test_reflect_example():
    r = reflect(_path([0, 1, 0.5, -0.2, 0.3]))
    assert np.allclose(r.values, [0, 1, 0.5, 0, 0.5])
    assert r.kind is PathKind.REFLECTED


def test_excursion_example():
    e = excursions(reflect(_path([0, 1, 0, 0, 2, 1, 0])))
    assert e.lengths.tolist() == [3.0, 2.0]
    assert e.intervals.tolist() == [[3.0, 6.0], [0.0, 2.0]]
    assert not e.truncated
    assert e.zero_measure == 1.0
    assert e.l2_norm() == pytest.approx(np.sqrt(13))


def test_censored_tie_breaks_left():
    e = excursions(reflect(_path([0, 1, 0, 2, 3])))
    assert e.lengths.tolist() == [2.0, 2.0]
    assert e.left.tolist() == [0.0, 2.0]
    assert e.censored.tolist() == [False, True]
    assert e.censored_length == 2.0
    assert e.top(3).tolist() == [2.0, 0.0, 0.0]
    assert e.top(3, include_censored=True).tolist() == [2.0, 2.0, 0.0]


def test_flat_path_has_no_excursions():
    e = path_excursions(_path([0, 0, -1, -2]))
    assert len(e) == 0 and e.zero_measure == 3.0


def test_write_csv():
    buf = io.StringIO()
    excursions(reflect(_path([0, 1, 0, 2]))).write_csv(buf)
    rows = buf.getvalue().splitlines()
    assert rows[0] == "rank,length,left,right,censored"
    assert rows[1] == "1,2.0,0.0,2.0,0"
    assert rows[2] == "2,1.0,2.0,3.0,1"


def test_l2_examples():
    assert l2_distance([3, 2], [3]) == 2.0
    assert l2_distance([], []) == 0.0
    assert l2_distance([1.0], [0.0]) == 1.0
    with pytest.raises(NotSorted):
        l2_distance([1, 2], [1])
    with pytest.raises(NotSorted):
        l2_distance([1, -1], [1])


values = st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=80)


@settings(max_examples=200, deadline=None)
@given(values)
def test_reflect_idempotent(v):
    p = _path([0.0] + v, dt=0.1)
    r = reflect(p)
    assert np.all(r.values >= 0)
    assert np.array_equal(reflect(r).values, r.values)


@settings(max_examples=200, deadline=None)
@given(values)
def test_grid_identity(v):
    # lengths plus zero-set measure equal the horizon; the zero set counted
    # independently as cells with both endpoints at zero
    p = _path([0.0] + v, dt=0.25)
    r = reflect(p)
    e = excursions(r)
    tol = 1e-12 * max(float(np.max(np.abs(r.values))), 1.0)
    z = r.values <= tol
    zero_cells = int(np.sum(z[:-1] & z[1:]))
    assert e.zero_measure == zero_cells * 0.25
    assert e.lengths.sum() + e.zero_measure == pytest.approx(r.horizon)
    assert np.all(np.diff(e.lengths) <= 0)
    # intervals are disjoint and every positive grid point lies inside one
    iv = np.sort(e.intervals, axis=0)
    assert np.all(iv[1:, 0] >= iv[:-1, 1])
    for t in r.grid[~z]:
        assert np.any((iv[:, 0] < t) & (t <= iv[:, 1]))


def test_dt_halving_stability(law13, rng):
    # coupled paths: the coarse path is the fine path read every other step
    H, dt = 20.0, 1e-4
    rel = []
    for _ in range(100):
        inc = lp.brownian_increments(law13.mu, law13.beta, 0.0, int(round(2 * H / dt)), dt / 2, rng)
        fine = np.concatenate(([0.0], np.cumsum(inc)))
        a = path_excursions(LimitPath.from_values(fine, dt / 2, PathKind.BROWNIAN_PARABOLIC)).top(5)
        b = path_excursions(LimitPath.from_values(fine[::2], dt, PathKind.BROWNIAN_PARABOLIC)).top(5)
        rel.append(np.abs(a - b) / b)
    assert np.all(np.mean(rel, axis=0) <= 0.02)


def test_walk_excursions_match_components(law13, rng):
    n, dt = 10**6, 1e-3
    worst = 0.0
    for _ in range(20):
        r = ex.explore(dm.sample_degrees(law13, n, rng), rng)
        sizes, lengths, cells = ex.excursion_cross_check(r.walk, n, ex.finite_third_moment_exponents(), 10.0, dt)
        worst = max(worst, cells)
        assert sizes[0] > 0
    assert worst <= 2.0


def test_even_minimum_path_zeros(rng):
    # W = (0, -1, -2, -1, -4): components {1, 2}, {3, 4}; W + 2K = (0, 1, 0, 3, 0)
    w = np.array([0, -1, -2, -1, -4])
    p, r = ex.even_minimum_path(w, 1.0, (1.0, 0.0), 4.0, 1.0)
    assert r.tolist() == [0, 1, 0, 3, 0]
    assert excursions(p).lengths.tolist() == [2.0, 2.0]
