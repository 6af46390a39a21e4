"""Main loop of the island-model NSGA-III with epsilon-level constraint handling."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..metrics import nondominated_mask
from ..objectives import Evaluator
from ..offloading import OffloadConfig
from ..radio import LinkBudgetParams, QueueParams
from ..scenario import GridScenario
from .config import EvolverConfig
from .epsilon import EpsilonState, epsilon_update
from .islands import (SELECT, VARY, Individual, SubPopulation, adapt_rates, front_hypervolume,
                      improvement_test, initialize, migrate, snapshot, stream)
from .nsga3 import nsga3_select, reference_points
from .operators import calibrate, variation
from .ranking import Ordering, epsilon_compare, nondominated_sort

log = logging.getLogger(__name__)

TELEMETRY_FIELDS = ("generation", "island", "epsilon", "rho", "crossover_rate", "mutation_rate",
                    "feasible_count", "best_f1", "best_f2", "best_f3", "hypervolume")


@dataclass
class ParetoResult:
    solutions: list[Individual]          # feasible non-dominated set of the final pool
    front: list[Individual]              # objective-space non-dominated set plus the feasible one
    population: list[Individual]
    telemetry: list[dict] = field(default_factory=list)
    variant: str = ""


_worker_evaluator: Evaluator | None = None


def _worker_init(evaluator: Evaluator):
    global _worker_evaluator
    _worker_evaluator = evaluator


def _worker_eval(packed: tuple[bytes, int]):
    bits = np.unpackbits(np.frombuffer(packed[0], dtype=np.uint8), count=packed[1]).astype(bool)
    return _worker_evaluator(bits)


class _BatchEvaluator:
    """Evaluates genome batches through the cache, fanning misses out to worker processes."""

    def __init__(self, evaluator: Evaluator, workers: int):
        self.evaluator = evaluator
        self.pool = None
        if workers > 1:
            self.pool = ProcessPoolExecutor(max_workers=workers, initializer=_worker_init,
                                            initargs=(evaluator,))

    def __call__(self, genomes: list[np.ndarray]):
        if self.pool is None:
            return [self.evaluator(g) for g in genomes]
        from ..objectives import genome_key
        keys = [genome_key(g) for g in genomes]
        missing = {}
        for k, g in zip(keys, genomes):
            if k not in self.evaluator._cache and k not in missing:
                missing[k] = g
        if missing:
            packed = [(np.packbits(g).tobytes(), len(g)) for g in missing.values()]
            chunk = max(1, math.ceil(len(packed) / (4 * self.pool._max_workers)))
            for k, res in zip(missing, self.pool.map(_worker_eval, packed, chunksize=chunk)):
                self.evaluator._cache[k] = res
        return [self.evaluator._cache[k] for k in keys]

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


def _tournament(sub: SubPopulation, rng: np.random.Generator) -> Individual:
    a, b = (sub.members[int(i)] for i in rng.integers(len(sub.members), size=2))
    cmp = epsilon_compare(a, b, sub.epsilon)
    if cmp == Ordering.A_BETTER:
        return a
    if cmp == Ordering.B_BETTER:
        return b
    return a if rng.random() < 0.5 else b


def _telemetry_row(g: int, sub: SubPopulation) -> dict:
    feas = [m for m in sub.members if m.feasible]
    front = snapshot(sub.members).feasible_front
    if feas:
        F = np.array([m.f for m in feas])
        best = F.min(axis=0)
    else:
        best = [float("nan")] * 3
    return {
        "generation": g,
        "island": sub.index,
        "epsilon": sub.epsilon,
        "rho": sub.rho,
        "crossover_rate": sub.crossover_rate,
        "mutation_rate": sub.mutation_rate,
        "feasible_count": len(feas),
        "best_f1": float(best[0]),
        "best_f2": float(best[1]),
        "best_f3": float(best[2]),
        "hypervolume": front_hypervolume(front),
    }


def _offspring(sub: SubPopulation, config: EvolverConfig, scenario: GridScenario, g: int) -> list[np.ndarray]:
    size = len(sub.members)
    children: list[np.ndarray] = []
    for pair in range((size + 1) // 2):
        rng = stream(config.master_seed, VARY, g, sub.index, pair)
        p1 = _tournament(sub, rng)
        p2 = _tournament(sub, rng)
        c1, c2 = variation(p1.genome, p2.genome, sub.crossover_rate, sub.mutation_rate, rng,
                           scenario.obstacles, config.n_mut)
        children.extend((c1, c2))
    children = children[:size]
    if config.calibrate:
        children = [calibrate(c, scenario, config.d_min_m) for c in children]
    return children


def evolve_island(sub: SubPopulation, config: EvolverConfig, scenario: GridScenario,
                  evaluate, refs: np.ndarray, g: int) -> None:
    """One generation on one island: vary, (calibrate), evaluate, select, adapt, update epsilon."""
    size = len(sub.members)
    genomes = _offspring(sub, config, scenario, g)
    offspring = [Individual(c, o, v) for c, (o, v) in zip(genomes, evaluate(genomes))]
    pool = sub.members + offspring
    F = np.array([m.f for m in pool])
    phi = np.array([m.phi for m in pool])
    fronts, rank = nondominated_sort(F, phi, sub.epsilon)
    chosen, niches = nsga3_select(F, fronts, refs, size, stream(config.master_seed, SELECT, g, sub.index))
    sub.members = [pool[int(i)] for i in chosen]
    for m, i, n in zip(sub.members, chosen, niches):
        m.rank, m.niche = int(rank[i]), int(n)

    improved = improvement_test(sub)
    sub.crossover_rate, sub.mutation_rate = adapt_rates(sub, improved, config)
    sub.prev_best = snapshot(sub.members)

    sub.phi_max = max(sub.phi_max, float(phi.max()))
    sub.rho = float(np.mean([m.feasible for m in sub.members]))
    if not config.constraint_handling:
        sub.epsilon = math.inf
    elif config.epsilon_schedule:
        state = EpsilonState(sub.epsilon, sub.phi_max, sub.rho)
        sub.epsilon = epsilon_update(state, g, config)
    else:
        sub.epsilon = 0.0


def _dedup(members: list[Individual]) -> list[Individual]:
    seen = set()
    out = []
    for m in members:
        key = tuple(m.f.tolist()) + (m.phi,)
        if key not in seen:
            seen.add(key)
            out.append(m)
    return out


def pareto_sets(population: list[Individual]) -> tuple[list[Individual], list[Individual]]:
    """Feasible non-dominated set, and the objective-space non-dominated set merged with it."""
    pop = _dedup(population)
    if not pop:
        return [], []
    F = np.array([m.f for m in pop])
    feas = np.array([m.feasible for m in pop])
    feasible_nd = np.zeros(len(pop), dtype=bool)
    if feas.any():
        idx = np.flatnonzero(feas)
        feasible_nd[idx[nondominated_mask(F[idx])]] = True
    front = nondominated_mask(F) | feasible_nd
    return [m for m, k in zip(pop, feasible_nd) if k], [m for m, k in zip(pop, front) if k]


def run(config: EvolverConfig, scenario: GridScenario, params: LinkBudgetParams = LinkBudgetParams(),
        q: QueueParams = QueueParams(), offload_cfg: OffloadConfig = OffloadConfig(),
        workers: int = 1, observer=None) -> ParetoResult:
    """Run the configured variant for ``config.generations`` generations.

    ``observer(g, islands)`` is called after initialization (g = 0) and after
    every migration. Results do not depend on ``workers``.
    """
    evaluator = Evaluator(scenario, params, q, offload_cfg, config.d_min_m)
    batch = _BatchEvaluator(evaluator, workers)
    try:
        refs = reference_points(config.reference_point_divisions, 3)
        islands = initialize(config, scenario, batch)
        telemetry = [_telemetry_row(0, sub) for sub in islands]
        if observer is not None:
            observer(0, islands)
        for g in range(1, config.generations + 1):
            for sub in islands:
                evolve_island(sub, config, scenario, batch, refs, g)
                telemetry.append(_telemetry_row(g, sub))
            migrate(islands, config)
            if observer is not None:
                observer(g, islands)
            log.debug("generation %d done", g)
    finally:
        batch.close()
    population = [m for sub in islands for m in sub.members]
    solutions, front = pareto_sets(population)
    return ParetoResult(solutions, front, population, telemetry, config.variant)
