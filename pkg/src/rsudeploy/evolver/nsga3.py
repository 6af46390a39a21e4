"""Reference-point environmental selection (Deb and Jain's NSGA-III niching)."""

from __future__ import annotations

from itertools import combinations

import numpy as np


def reference_points(divisions: int, n_obj: int = 3) -> np.ndarray:
    """Das-Dennis simplex lattice: every point with coordinates in steps of 1/divisions summing to 1."""
    pts = []
    # stars and bars: choose bar positions among divisions + n_obj - 1 slots
    for bars in combinations(range(divisions + n_obj - 1), n_obj - 1):
        prev = -1
        coords = []
        for b in bars:
            coords.append(b - prev - 1)
            prev = b
        coords.append(divisions + n_obj - 2 - prev)
        pts.append(coords)
    return np.array(pts, dtype=float) / divisions


def associate(Fn: np.ndarray, refs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest reference line (through the origin) per point, and the perpendicular distance."""
    w = refs / np.linalg.norm(refs, axis=1, keepdims=True)
    proj = Fn @ w.T                                       # (n, H) scalar projections
    d2 = np.sum(Fn ** 2, axis=1, keepdims=True) - proj ** 2
    dist = np.sqrt(np.maximum(d2, 0.0))
    niche = np.argmin(dist, axis=1)
    return niche, dist[np.arange(len(Fn)), niche]


def nsga3_select(F: np.ndarray, fronts: list, refs: np.ndarray, target_size: int,
                 rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Pick ``target_size`` pool indices: whole fronts first, then niche-preserving fill.

    Objectives are normalized by the ideal and nadir points of the candidate
    set (the fronts up to and including the one that overflows). Returns the
    chosen indices and their associated reference point.
    """
    F = np.asarray(F, dtype=float)
    chosen: list[int] = []
    last = None
    for front in fronts:
        if len(chosen) + len(front) <= target_size:
            chosen.extend(int(i) for i in front)
            if len(chosen) == target_size:
                break
        else:
            last = [int(i) for i in front]
            break
    candidates = np.array(chosen + (last or []), dtype=np.int64)
    if len(candidates) == 0:
        return candidates, candidates
    lo = F[candidates].min(axis=0)
    span = F[candidates].max(axis=0) - lo
    span = np.where(span > 0, span, 1.0)
    niche, dist = associate((F[candidates] - lo) / span, refs)
    niche_of = dict(zip(candidates.tolist(), niche.tolist()))
    if last is None:
        return candidates, niche[: len(candidates)]

    dist_of = dict(zip(candidates.tolist(), dist.tolist()))
    counts = np.zeros(len(refs), dtype=np.int64)
    for i in chosen:
        counts[niche_of[i]] += 1
    members: dict[int, list[int]] = {}
    for i in last:
        members.setdefault(niche_of[i], []).append(i)
    open_refs = set(members)
    need = target_size - len(chosen)
    while need > 0:
        open_list = sorted(open_refs)
        c = counts[open_list]
        tied = [r for r, k in zip(open_list, c) if k == c.min()]
        j = tied[int(rng.integers(len(tied)))]
        pool = members[j]
        if counts[j] == 0:
            pick = min(pool, key=lambda i: (dist_of[i], i))
        else:
            pick = pool[int(rng.integers(len(pool)))]
        pool.remove(pick)
        if not pool:
            open_refs.discard(j)
        chosen.append(pick)
        counts[j] += 1
        need -= 1
    idx = np.array(chosen, dtype=np.int64)
    return idx, np.array([niche_of[i] for i in chosen], dtype=np.int64)
