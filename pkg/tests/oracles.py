"""Slow, direct reference implementations used to cross-check the library."""

from __future__ import annotations

import itertools
import math
from collections import deque

import numpy as np


def link_budget_rate(loss_db, bandwidth_hz=1e7, tx_dbm=23.0, n0_dbm_hz=-174.0):
    """Shannon rate from a hand-written link budget."""
    noise_dbm = n0_dbm_hz + 10 * math.log10(bandwidth_hz)
    snr = 10 ** ((tx_dbm - loss_db - noise_dbm) / 10)
    return bandwidth_hz * math.log2(1 + snr)


def constrained_better(fa, pa, fb, pb, eps) -> bool:
    """Scalar epsilon-level precedence: does (fa, pa) beat (fb, pb)?"""
    def dom(x, y):
        return all(a <= b for a, b in zip(x, y)) and any(a < b for a, b in zip(x, y))
    if (pa <= eps and pb <= eps) or pa == pb:
        return dom(fa, fb)
    return pa < pb


def peel_fronts(F, phi, eps):
    """Front index of every point by repeatedly removing the unbeaten set."""
    n = len(F)
    remaining = set(range(n))
    rank = [-1] * n
    r = 0
    while remaining:
        layer = [i for i in remaining
                 if not any(constrained_better(F[j], phi[j], F[i], phi[i], eps) for j in remaining if j != i)]
        assert layer, "cyclic precedence"
        for i in layer:
            rank[i] = r
        remaining -= set(layer)
        r += 1
    return rank


def monte_carlo_hv(points, ref, samples=1_000_000, seed=0, chunk=100_000):
    """Hypervolume estimate by uniform sampling of the box [min(points), ref]."""
    pts = np.asarray(points, dtype=float)
    ref = np.asarray(ref, dtype=float)
    lo = pts.min(axis=0)
    box = float(np.prod(ref - lo))
    rng = np.random.default_rng(seed)
    hits = 0
    for start in range(0, samples, chunk):
        m = min(chunk, samples - start)
        x = lo + rng.random((m, pts.shape[1])) * (ref - lo)
        cols = [np.ascontiguousarray(x[:, j]) for j in range(x.shape[1])]
        dominated = np.zeros(m, dtype=bool)
        hit = np.empty(m, dtype=bool)
        for p in pts:
            np.greater_equal(cols[0], p[0], out=hit)
            for j in range(1, len(cols)):
                hit &= cols[j] >= p[j]
            dominated |= hit
        hits += int(dominated.sum())
    return box * hits / samples


def obstacle_edge_distance(width, height, cell, obstacles, idx):
    """Distance from a cell center to the boundary of its 4-connected obstacle region.

    Breadth-first search collects the region, then every region edge facing a
    non-region cell and every region corner touched by a non-region cell is
    measured. Edges on the map border do not count.
    """
    obstacles = set(obstacles)
    if idx not in obstacles:
        return 0.0
    region = {idx}
    queue = deque([idx])
    while queue:
        c = queue.popleft()
        r, q = divmod(c, width)
        for dr, dq in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            rr, qq = r + dr, q + dq
            if 0 <= rr < height and 0 <= qq < width and rr * width + qq in obstacles and rr * width + qq not in region:
                region.add(rr * width + qq)
                queue.append(rr * width + qq)

    def outside(rr, qq):
        return 0 <= rr < height and 0 <= qq < width and rr * width + qq not in region

    r0, q0 = divmod(idx, width)
    px, py = (q0 + 0.5) * cell, (r0 + 0.5) * cell
    best = math.inf
    for c in region:
        r, q = divmod(c, width)
        x0, y0, x1, y1 = q * cell, r * cell, (q + 1) * cell, (r + 1) * cell
        edges = {(0, -1): ((x0, y0), (x0, y1)), (0, 1): ((x1, y0), (x1, y1)),
                 (-1, 0): ((x0, y0), (x1, y0)), (1, 0): ((x0, y1), (x1, y1))}
        for (dr, dq), (a, b) in edges.items():
            if outside(r + dr, q + dq):
                best = min(best, _point_segment(px, py, a, b))
        for dr, dq, (cx, cy) in ((-1, -1, (x0, y0)), (-1, 1, (x1, y0)), (1, -1, (x0, y1)), (1, 1, (x1, y1))):
            if outside(r + dr, q + dq):
                best = min(best, math.hypot(px - cx, py - cy))
    return best


def _point_segment(px, py, a, b):
    (ax, ay), (bx, by) = a, b
    dx, dy = bx - ax, by - ay
    t = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy)))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def period_total_delay(trans, targets, mu, cd, penalty, policy="penalty"):
    """Total delay of one period; ``trans[v][j]`` is vehicle v's delay to RSU j, target -1 is cellular.

    A saturated RSU adds ``penalty`` to each of its vehicles' transmission
    delay, or under the cellular policy charges each of them ``cd``.
    """
    total = 0.0
    counts = {}
    for t in targets:
        if t >= 0:
            counts[t] = counts.get(t, 0) + 1
    for v, t in enumerate(targets):
        if t < 0:
            total += cd
        else:
            n = counts[t]
            if n < mu:
                total += trans[v][t] + 1.0 / (mu - n)
            else:
                total += (trans[v][t] + penalty) if policy == "penalty" else cd
    return total


def exhaustive_optimum(trans, mu, cd, penalty, policy="penalty"):
    """Minimum period delay over every joint assignment (cellular or any finite-delay RSU)."""
    options = [[-1] + [j for j, d in enumerate(row) if math.isfinite(d)] for row in trans]
    return min(period_total_delay(trans, combo, mu, cd, penalty, policy) for combo in itertools.product(*options))


def is_stable(trans, targets, mu, cd, penalty, policy="penalty", tol=1e-9):
    """No single vehicle can lower the period's total delay by moving on its own."""
    base = period_total_delay(trans, targets, mu, cd, penalty, policy)
    for v, row in enumerate(trans):
        for alt in [-1] + [j for j, d in enumerate(row) if math.isfinite(d)]:
            if alt == targets[v]:
                continue
            trial = list(targets)
            trial[v] = alt
            if period_total_delay(trans, trial, mu, cd, penalty, policy) < base - tol:
                return False
    return True
