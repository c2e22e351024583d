"""Union-find component counting and a direct G(n, p) sampler.

Both are deliberately independent of the depth-first explorer so that they
can serve as oracles for it.
"""

import math

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@numba.njit(cache=True, nogil=True)
def _component_sizes(n, a, b):
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    for e in range(a.shape[0]):
        ra = _find(parent, a[e])
        rb = _find(parent, b[e])
        if ra == rb:
            continue
        if size[ra] < size[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        size[ra] += size[rb]
    count = 0
    for v in range(n):
        if parent[v] == v:
            count += 1
    out = np.empty(count, dtype=np.int64)
    j = 0
    for v in range(n):
        if parent[v] == v:
            out[j] = size[v]
            j += 1
    return out


def component_sizes(n, edges):
    """Sizes of connected components of the graph on ``range(n)``."""
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return _component_sizes(int(n), np.ascontiguousarray(e[:, 0]), np.ascontiguousarray(e[:, 1]))


def count_components(n, edges):
    return len(component_sizes(n, edges))


@numba.njit(cache=True, nogil=True)
def _gnp_edges(n, log_q, u):
    # Batagelj-Brandes geometric skipping over the pairs w < v.
    cap = u.shape[0]
    a = np.empty(cap, dtype=np.int64)
    b = np.empty(cap, dtype=np.int64)
    m = 0
    v = 1
    w = -1
    k = 0
    while v < n:
        if k >= cap:
            return a[:0], b[:0], False
        r = u[k]
        k += 1
        w = w + 1 + int(math.floor(math.log(1.0 - r) / log_q))
        while w >= v and v < n:
            w -= v
            v += 1
        if v < n:
            if m >= cap:
                return a[:0], b[:0], False
            a[m] = w
            b[m] = v
            m += 1
    return a[:m], b[:m], True


def gnp_edges(n, p, rng):
    """Edge list of an Erdos-Renyi graph G(n, p)."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    log_q = math.log1p(-p)
    expected = p * n * (n - 1) / 2.0
    cap = int(expected + 10.0 * math.sqrt(expected) + 64)
    while True:
        a, b, ok = _gnp_edges(int(n), log_q, rng.random(cap))
        if ok:
            return np.stack((a, b), axis=1)
        cap *= 2


def gnp_component_sizes(n, p, rng):
    return component_sizes(n, gnp_edges(n, p, rng))
