"""Depth-first configuration-model construction of the multigraph.

Half-edges are paired one at a time following the depth-first rule: always
pair an active half-edge of the most recently discovered vertex that still
has one, to a uniformly chosen living half-edge. The walk
``W(i) = sum_{j<=i} (D_j - 2 - 2 c_j)`` over discovery order encodes the
component sizes exactly.
"""

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import (
    HorizonExceedsN,
    IndexOutOfRange,
    MalformedWalk,
    OddDegreeSum,
    SimplicityTimeout,
)
from .paths import LimitPath, PathKind

SLEEPING, ACTIVE, DEAD = 0, 1, 2


@numba.njit(cache=True, nogil=True)
def _explore_kernel(deg, u, record_active):
    n = deg.shape[0]
    start = np.empty(n + 1, dtype=np.int64)
    start[0] = 0
    for v in range(n):
        start[v + 1] = start[v] + deg[v]
    H = start[n]
    owner = np.empty(H, dtype=np.int64)
    for v in range(n):
        for h in range(start[v], start[v + 1]):
            owner[h] = v
    living = np.arange(H)
    pos = np.arange(H)
    state = np.zeros(H, dtype=np.int8)
    nliv = H

    disc = np.full(n, -1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    cursor = start[:n].copy()
    stack = np.empty(n, dtype=np.int64)
    sp = 0
    cyc = np.zeros(n, dtype=np.int64)
    m = H // 2
    pair_l = np.empty(m, dtype=np.int64)
    pair_r = np.empty(m, dtype=np.int64)
    comp = np.empty(n, dtype=np.int64)
    if record_active:
        act_trace = np.empty(m, dtype=np.int64)
        disc_trace = np.empty(m, dtype=np.int64)
    else:
        act_trace = np.empty(0, dtype=np.int64)
        disc_trace = np.empty(0, dtype=np.int64)
    ncomp = 0
    ndisc = 0
    npair = 0
    ui = 0
    nact = 0

    while nliv > 0:
        # new component: every living half-edge is sleeping here
        idx = int(u[ui] * nliv)
        ui += 1
        if idx >= nliv:
            idx = nliv - 1
        v = owner[living[idx]]
        disc[v] = ndisc
        order[ndisc] = v
        ndisc += 1
        comp_first = ndisc - 1
        for h in range(start[v], start[v + 1]):
            state[h] = ACTIVE
        nact += deg[v]
        stack[sp] = v
        sp += 1
        while sp > 0:
            v = stack[sp - 1]
            c = cursor[v]
            end = start[v + 1]
            while c < end and state[c] != ACTIVE:
                c += 1
            cursor[v] = c
            if c == end:
                sp -= 1
                continue
            l = c
            state[l] = DEAD
            nact -= 1
            # swap-remove l from living
            p = pos[l]
            last = living[nliv - 1]
            living[p] = last
            pos[last] = p
            nliv -= 1
            if record_active:
                act_trace[npair] = nact
                disc_trace[npair] = ndisc
            idx = int(u[ui] * nliv)
            ui += 1
            if idx >= nliv:
                idx = nliv - 1
            r = living[idx]
            if state[r] == SLEEPING:
                w = owner[r]
                disc[w] = ndisc
                order[ndisc] = w
                ndisc += 1
                for h in range(start[w], start[w + 1]):
                    if h != r:
                        state[h] = ACTIVE
                nact += deg[w] - 1
                stack[sp] = w
                sp += 1
            else:
                cyc[disc[owner[l]]] += 1
                nact -= 1
            state[r] = DEAD
            p = pos[r]
            last = living[nliv - 1]
            living[p] = last
            pos[last] = p
            nliv -= 1
            pair_l[npair] = l
            pair_r[npair] = r
            npair += 1
        comp[ncomp] = ndisc - comp_first
        ncomp += 1
    return order, disc, owner, cyc, pair_l, pair_r, comp[:ncomp], act_trace, disc_trace


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ExplorationResult:
    """Outcome of one depth-first construction.

    Vertex indices in ``edges`` and ``first_defect`` refer to discovery
    order; ``first_defect`` is 1-based and ``None`` for a simple multigraph.
    """

    ordered_degrees: np.ndarray
    cycle_counts: np.ndarray
    walk: np.ndarray
    component_sizes: np.ndarray
    edge_multiset: np.ndarray
    edges: np.ndarray
    is_simple: bool
    first_defect: int = None
    active_trace: np.ndarray = None
    discovered_trace: np.ndarray = None
    vertex_order: np.ndarray = None

    @property
    def n(self):
        return len(self.ordered_degrees)

    @property
    def n_components(self):
        return len(self.component_sizes)

    @property
    def n_edges(self):
        return len(self.edges)

    def cycle_free_walk(self):
        return np.concatenate(([0], np.cumsum(self.ordered_degrees - 2)))

    def sorted_sizes(self):
        return np.sort(self.component_sizes)[::-1]


def _defects(edges, n):
    """Loop/multi-edge flags and the 1-based first defect index."""
    a = edges[:, 0]
    b = edges[:, 1]
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    bad = lo == hi
    if len(lo):
        key = lo.astype(np.int64) * n + hi
        uniq, inv, cnt = np.unique(key, return_inverse=True, return_counts=True)
        bad |= cnt[inv] > 1
    if not bad.any():
        return True, None
    return False, int(lo[bad].min()) + 1


def explore(degrees, rng, record_active=False):
    """Build the multigraph by depth-first pairing and return its walk.

    ``degrees`` must be positive with an even sum; isolated vertices are the
    caller's business (see :func:`explore_with_isolated`).
    """
    deg = np.ascontiguousarray(degrees, dtype=np.int64)
    if deg.ndim != 1 or len(deg) == 0:
        raise ValueError("degrees must be a non-empty vector")
    if np.any(deg < 1):
        raise ValueError("degrees must be positive; filter isolated vertices first")
    total = int(deg.sum())
    if total % 2:
        raise OddDegreeSum(f"degree sum {total} is odd")
    n = len(deg)
    u = rng.random(total // 2 + n)
    order, disc, owner, cyc, pl, pr, comp, act, dtr = _explore_kernel(deg, u, record_active)
    dhat = deg[order]
    steps = dhat - 2 - 2 * cyc
    walk = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(steps, out=walk[1:])
    edges = np.stack((disc[owner[pl]], disc[owner[pr]]), axis=1)
    simple, first = _defects(edges, n)
    return ExplorationResult(
        ordered_degrees=_frozen(dhat),
        cycle_counts=_frozen(cyc),
        walk=_frozen(walk),
        component_sizes=_frozen(comp),
        edge_multiset=_frozen(np.stack((pl, pr), axis=1)),
        edges=_frozen(edges),
        is_simple=simple,
        first_defect=first,
        active_trace=_frozen(act) if record_active else None,
        discovered_trace=_frozen(dtr) if record_active else None,
        vertex_order=_frozen(order),
    )


def explore_with_isolated(degrees, rng, **kw):
    """Explore the positive-degree vertices; degree-0 vertices become extra
    size-1 components. Returns ``(result, n_isolated)``."""
    deg = np.asarray(degrees)
    positive = deg[deg > 0]
    n_iso = int(len(deg) - len(positive))
    if len(positive) == 0:
        return None, n_iso
    return explore(positive, rng, **kw), n_iso


def components_from_walk(walk):
    """Recover ``zeta`` and component sizes from a depth-first walk.

    ``zeta(k)`` is the first index at which the walk equals ``-2k``.
    """
    w = np.asarray(walk, dtype=np.int64)
    if len(w) == 0 or w[0] != 0:
        raise MalformedWalk("walk must start at 0")
    n = len(w) - 1
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(1, dtype=np.int64)
    final = int(w[-1])
    if final % 2 or final >= 0:
        raise MalformedWalk(f"walk ends at {final}, not at a negative even value")
    # hitting times of each even level -2k, in order
    running_min = np.minimum.accumulate(w)
    k_total = -final // 2
    levels = -2 * np.arange(1, k_total + 1)
    # first index i with running_min[i] <= level, then check equality
    first = np.searchsorted(-running_min, -levels, side="left")
    if np.any(first > n) or np.any(w[np.minimum(first, n)] != levels):
        raise MalformedWalk("some level -2k is skipped before exhaustion")
    zeta = np.concatenate(([0], first))
    if zeta[-1] != n:
        raise MalformedWalk("walk does not end at its last component boundary")
    sizes = np.diff(zeta)
    if np.any(sizes <= 0):
        raise MalformedWalk("non-increasing component boundaries")
    return sizes, zeta


def component_index(walk, i):
    """1-based index of the component containing the i-th discovered vertex,
    ``1 - ceil(min_{j<i} W(j) / 2)``."""
    w = np.asarray(walk)
    n = len(w) - 1
    if not 1 <= i <= n:
        raise IndexOutOfRange(f"i = {i} outside [1, {n}]")
    return 1 - math.ceil(int(w[:i].min()) / 2)


def sample_simple(degrees, rng, max_attempts=1000):
    """Re-pair the same degree vector until the multigraph is simple.

    Returns ``(result, attempts)``.
    """
    if max_attempts < 1:
        raise ValueError("max_attempts must be at least 1")
    for attempt in range(1, max_attempts + 1):
        res = explore(degrees, rng)
        if res.is_simple:
            return res, attempt
    raise SimplicityTimeout(f"no simple graph in {max_attempts} attempts", attempts=max_attempts)


def finite_third_moment_exponents():
    return (2.0 / 3.0, 1.0 / 3.0)


def power_law_exponents(gamma):
    return ((gamma - 2.0) / (gamma - 1.0), 1.0 / (gamma - 1.0))


def rescale_walk(walk, n, exponents, horizon, dt):
    """Grid path ``t -> n**-space * W(floor(t n**time))`` on ``[0, horizon]``."""
    time_exp, space_exp = exponents
    w = np.asarray(walk)
    m = int(round(horizon / dt))
    grid = np.arange(m + 1) * dt
    idx = np.floor(grid * n**time_exp + 1e-9).astype(np.int64)
    if idx[-1] > len(w) - 1:
        raise HorizonExceedsN(f"horizon {horizon} needs walk index {idx[-1]} > {len(w) - 1}")
    values = w[idx] * n ** (-space_exp)
    return LimitPath(grid=grid, values=values.astype(float), kind=PathKind.RESCALED_WALK, dt=dt)


def even_minimum_path(walk, n, exponents, horizon, dt):
    """Grid path of ``W(i) + 2 K(i)`` (``K`` the component index), rescaled.

    ``W + 2K`` is at least 1 inside every component and exactly 0 at each
    ``zeta(k)``, so its excursions are the component intervals. Each grid
    value is the minimum over the indices of its cell, which keeps every
    component end visible on the grid.
    """
    time_exp, space_exp = exponents
    w = np.asarray(walk, dtype=np.int64)
    m = int(round(horizon / dt))
    grid = np.arange(m + 1) * dt
    idx = np.floor(grid * n**time_exp + 1e-9).astype(np.int64)
    if idx[-1] > len(w) - 1:
        raise HorizonExceedsN(f"horizon {horizon} needs walk index {idx[-1]} > {len(w) - 1}")
    if np.any(np.diff(idx) < 1):
        raise ValueError("dt is finer than one walk step")
    past_min = np.minimum.accumulate(w)
    r = np.zeros(len(w), dtype=np.int64)
    r[1:] = w[1:] + 2 * (1 - np.ceil(past_min[:-1] / 2).astype(np.int64))
    values = np.zeros(m + 1)
    values[1:] = np.minimum.reduceat(r[: idx[-1] + 1], idx[:-1] + 1) * n ** (-space_exp)
    return LimitPath(grid=grid, values=values, kind=PathKind.RESCALED_WALK, dt=dt), r


def excursion_cross_check(walk, n, exponents, horizon, dt, k=3):
    """Top ``k`` component sizes ending by ``horizon`` (rescaled) against the
    top ``k`` complete grid excursions of :func:`even_minimum_path`.

    Returns ``(sizes, lengths, cells)`` with ``cells`` the largest
    discrepancy in grid cells.
    """
    from .excursions import excursions

    path, r = even_minimum_path(walk, n, exponents, horizon, dt)
    T = int(np.floor(horizon * n ** exponents[0] + 1e-9))
    ends = np.flatnonzero(r[1 : T + 1] == 0) + 1
    sizes = np.sort(np.diff(np.concatenate(([0], ends))))[::-1] * n ** (-exponents[0])
    top = np.zeros(k)
    top[: min(k, len(sizes))] = sizes[:k]
    lengths = excursions(path).top(k)
    return top, lengths, float(np.max(np.abs(top - lengths)) / dt)
