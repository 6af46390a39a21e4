"""Binary variation operators and the spacing calibration repair."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ..scenario import GridScenario, traffic_volume_map


def variation(p1: np.ndarray, p2: np.ndarray, crossover_rate: float, mutation_rate: float,
              rng: np.random.Generator, obstacles: np.ndarray | None = None,
              n_mut: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Uniform crossover with probability ``crossover_rate``, then per child a
    mutation event with probability ``mutation_rate`` that toggles ``n_mut``
    distinct genes. A toggle never switches an obstacle cell on.
    """
    if rng.random() < crossover_rate:
        take = rng.random(len(p1)) < 0.5
        c1 = np.where(take, p1, p2)
        c2 = np.where(take, p2, p1)
    else:
        c1, c2 = p1.copy(), p2.copy()
    for child in (c1, c2):
        if rng.random() < mutation_rate:
            idx = rng.choice(len(child), size=min(n_mut, len(child)), replace=False)
            child[idx] = ~child[idx]
            if obstacles is not None:
                child[idx] &= ~obstacles[idx]
    return c1, c2


def calibrate(genome: np.ndarray, scenario: GridScenario, d_min_m: float,
              radius_m: float | None = None) -> np.ndarray:
    """Remove RSUs until every pair is at least ``d_min_m`` apart.

    The closest violating pair is resolved first: the RSU with the larger
    traffic volume inside ``radius_m`` (default: coverage radius) stays; on
    equal volume the higher cell index goes. Only bits are cleared.
    """
    out = np.array(genome, dtype=bool, copy=True)
    cells = np.flatnonzero(out)
    if len(cells) < 2:
        return out
    volume = traffic_volume_map(scenario, scenario.coverage_radius_m if radius_m is None else radius_m)
    dist = squareform(pdist(scenario.centers[cells]))
    np.fill_diagonal(dist, np.inf)
    alive = np.ones(len(cells), dtype=bool)
    while True:
        d = np.where(alive[:, None] & alive[None, :], dist, np.inf)
        flat = int(np.argmin(d))            # row-major: lowest (i, j) wins ties
        i, j = divmod(flat, len(cells))
        if not d[i, j] < d_min_m:
            break
        a, b = cells[i], cells[j]
        if volume[a] > volume[b]:
            drop = j
        elif volume[b] > volume[a]:
            drop = i
        else:
            drop = i if a > b else j
        alive[drop] = False
        out[cells[drop]] = False
    return out
