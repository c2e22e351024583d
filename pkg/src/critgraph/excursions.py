"""Reflection above the running minimum and excursion extraction."""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import NotSorted
from .paths import LimitPath, PathKind

ZERO_TOL_REL = 1e-12


def reflect(path):
    """``R(t) = X(t) - min_{s <= t} X(s)``."""
    v = np.asarray(path.values, dtype=float)
    r = v - np.minimum.accumulate(v)
    return LimitPath(grid=path.grid, values=r, kind=PathKind.REFLECTED, dt=path.dt)


def default_zero_tol(values):
    scale = float(np.max(np.abs(values))) if len(values) else 0.0
    return ZERO_TOL_REL * max(scale, 1.0)


@dataclass(frozen=True, eq=False)
class ExcursionList:
    """Excursions sorted by decreasing length (ties: leftmost first).

    ``left``/``right`` are times of the bracketing grid zeros; an excursion
    still open at the horizon is kept with ``censored`` set and
    ``right == horizon``.
    """

    lengths: np.ndarray
    left: np.ndarray
    right: np.ndarray
    censored: np.ndarray
    horizon: float
    zero_measure: float

    def __len__(self):
        return len(self.lengths)

    @property
    def truncated(self):
        return bool(self.censored.any())

    @property
    def intervals(self):
        return np.stack((self.left, self.right), axis=1)

    @property
    def censored_length(self):
        return float(self.lengths[self.censored].sum()) if self.truncated else 0.0

    def complete_lengths(self):
        return self.lengths[~self.censored]

    def top(self, k, include_censored=False):
        """First ``k`` lengths, zero-padded."""
        src = self.lengths if include_censored else self.complete_lengths()
        out = np.zeros(k)
        m = min(k, len(src))
        out[:m] = src[:m]
        return out

    def l2_norm(self):
        return math.sqrt(float(np.sum(self.lengths**2)))

    def write_csv(self, fh):
        w = csv.writer(fh)
        w.writerow(["rank", "length", "left", "right", "censored"])
        for i in range(len(self)):
            w.writerow([i + 1, repr(float(self.lengths[i])), repr(float(self.left[i])),
                        repr(float(self.right[i])), int(self.censored[i])])


def excursion_indices(values, zero_tol):
    """Grid index pairs ``(a, b)`` of the bracketing zeros of each maximal
    run of ``values > zero_tol``, plus a censoring flag per run."""
    pos = np.asarray(values) > zero_tol
    m = len(pos) - 1
    if m < 0 or not pos.any():
        z = np.zeros(0, dtype=np.int64)
        return z, z, np.zeros(0, dtype=bool)
    edge = np.diff(pos.astype(np.int8))
    starts = np.flatnonzero(edge == 1) + 1
    ends = np.flatnonzero(edge == -1)
    if pos[0]:
        starts = np.concatenate(([0], starts))
    if pos[-1]:
        ends = np.concatenate((ends, [m]))
    left = np.maximum(starts - 1, 0)
    right = np.minimum(ends + 1, m)
    censored = np.zeros(len(starts), dtype=bool)
    if pos[-1]:
        censored[-1] = True
    return left, right, censored


def excursions(reflected, zero_tol=None):
    """Excursions of a nonnegative grid path above ``zero_tol``."""
    v = np.asarray(reflected.values, dtype=float)
    if zero_tol is None:
        zero_tol = default_zero_tol(v)
    a, b, cens = excursion_indices(v, zero_tol)
    g = reflected.grid
    lengths = g[b] - g[a]
    order = np.lexsort((a, -lengths))
    m = len(v) - 1
    zero_cells = m - int(np.sum(b - a))
    return ExcursionList(
        lengths=lengths[order],
        left=g[a][order],
        right=g[b][order],
        censored=cens[order],
        horizon=reflected.horizon,
        zero_measure=zero_cells * reflected.dt,
    )


def path_excursions(path, zero_tol=None):
    return excursions(reflect(path), zero_tol)


def _check_sorted(x, name):
    x = np.asarray(x, dtype=float).ravel()
    if np.any(x < 0):
        raise NotSorted(f"{name} has negative entries")
    if np.any(np.diff(x) > 0):
        raise NotSorted(f"{name} is not non-increasing")
    return x


def l2_distance(a, b):
    """Euclidean distance in the space of decreasing square-summable sequences."""
    a = _check_sorted(a, "a")
    b = _check_sorted(b, "b")
    m = max(len(a), len(b))
    pa = np.zeros(m)
    pb = np.zeros(m)
    pa[: len(a)] = a
    pb[: len(b)] = b
    return float(np.linalg.norm(pa - pb))
