"""Epsilon-level comparison and the constrained non-dominated sort built on it."""

from __future__ import annotations

from enum import IntEnum

import numpy as np


class Ordering(IntEnum):
    B_BETTER = -1
    INCOMPARABLE = 0
    A_BETTER = 1


def _dominates(fa, fb) -> bool:
    return bool(np.all(fa <= fb) and np.any(fa < fb))


def epsilon_compare(a, b, eps: float) -> Ordering:
    """Compare two evaluated individuals under violation tolerance ``eps``.

    Both within tolerance, or equally violating: Pareto dominance decides.
    Otherwise the smaller overall violation wins.
    """
    fa, fb = np.asarray(a.f, dtype=float), np.asarray(b.f, dtype=float)
    if (a.phi <= eps and b.phi <= eps) or a.phi == b.phi:
        if _dominates(fa, fb):
            return Ordering.A_BETTER
        if _dominates(fb, fa):
            return Ordering.B_BETTER
        return Ordering.INCOMPARABLE
    return Ordering.A_BETTER if a.phi < b.phi else Ordering.B_BETTER


def better_matrix(F: np.ndarray, phi: np.ndarray, eps: float) -> np.ndarray:
    """``M[i, j]`` is True when i beats j under the epsilon-level comparison."""
    F = np.asarray(F, dtype=float)
    phi = np.asarray(phi, dtype=float)
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    dom = le & lt
    low = phi <= eps
    by_dominance = (low[:, None] & low[None, :]) | (phi[:, None] == phi[None, :])
    return np.where(by_dominance, dom, phi[:, None] < phi[None, :])


def nondominated_sort(F, phi, eps: float = 0.0) -> tuple[list[np.ndarray], np.ndarray]:
    """Fast non-dominated sorting under the epsilon-level comparison.

    Returns the fronts (index arrays, best first) and the front index of
    every member.
    """
    n = len(F)
    rank = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return [], rank
    beats = better_matrix(F, phi, eps)
    count = beats.sum(axis=0)
    fronts = []
    current = np.flatnonzero(count == 0)
    r = 0
    while len(current):
        rank[current] = r
        fronts.append(current)
        count = count - beats[current].sum(axis=0)
        r += 1
        current = np.flatnonzero((count == 0) & (rank < 0))
    if np.any(rank < 0):
        raise RuntimeError("comparison relation is cyclic")
    return fronts, rank
