from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..metrics import hypervolume, nondominated_mask, normalize
from ..objectives import ObjectiveVector, ViolationReport
from .config import EvolverConfig
from .epsilon import initial_epsilon
from .ranking import nondominated_sort

# purpose tags for per-slot random streams
INIT, VARY, SELECT, MIGRATE = range(4)


def stream(master_seed: int, purpose: int, generation: int, island: int, slot: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(master_seed), purpose, generation, island, slot])


@dataclass
class Individual:
    genome: np.ndarray
    objectives: ObjectiveVector
    violation: ViolationReport
    rank: int = 0
    niche: int = -1

    @property
    def f(self) -> np.ndarray:
        return self.objectives.as_array()

    @property
    def phi(self) -> float:
        return self.violation.phi

    @property
    def feasible(self) -> bool:
        return self.violation.phi == 0

    def copy(self) -> "Individual":
        return replace(self, genome=self.genome.copy())


@dataclass
class BestSnapshot:
    feasible_front: np.ndarray   # (n, 3) objective vectors of the feasible non-dominated set
    min_phi: float


@dataclass
class SubPopulation:
    members: list[Individual]
    crossover_rate: float
    mutation_rate: float
    epsilon: float
    prev_best: BestSnapshot | None = None
    phi_max: float = 0.0
    rho: float = 0.0
    index: int = 0
    extra: dict = field(default_factory=dict)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        F = np.array([m.f for m in self.members]).reshape(-1, 3)
        phi = np.array([m.phi for m in self.members], dtype=float)
        return F, phi


def snapshot(members: list[Individual]) -> BestSnapshot:
    feas = [m.f for m in members if m.feasible]
    front = np.array(feas).reshape(-1, 3)
    if len(front):
        front = front[nondominated_mask(front)]
    min_phi = min((m.phi for m in members), default=float("inf"))
    return BestSnapshot(front, min_phi)


def front_hypervolume(front: np.ndarray, lower=None, upper=None) -> float:
    """Hypervolume of a front normalized to [0, 1] by the given (or its own) bounds, reference 1.1."""
    if len(front) == 0:
        return 0.0
    lower = front.min(axis=0) if lower is None else lower
    upper = front.max(axis=0) if upper is None else upper
    return hypervolume(normalize(front, lower, upper), (1.1, 1.1, 1.1))


def improvement_test(sub: SubPopulation) -> bool:
    """Whether the island's best state improved since ``sub.prev_best``.

    With feasible members: the feasible non-dominated set's hypervolume grew,
    both sets normalized by their common bounds. Without: the minimum
    violation dropped.
    """
    now = snapshot(sub.members)
    prev = sub.prev_best
    if prev is None:
        return False
    if len(now.feasible_front):
        if len(prev.feasible_front) == 0:
            return True
        both = np.vstack([now.feasible_front, prev.feasible_front])
        lo, hi = both.min(axis=0), both.max(axis=0)
        return front_hypervolume(now.feasible_front, lo, hi) > front_hypervolume(prev.feasible_front, lo, hi) + 1e-12
    if len(prev.feasible_front):
        return False
    return now.min_phi < prev.min_phi


def adapt_rates(sub: SubPopulation, improved: bool, config: EvolverConfig) -> tuple[float, float]:
    if not config.adaptive_rates:
        return sub.crossover_rate, sub.mutation_rate
    sign = 1.0 if improved else -1.0
    cr = sub.crossover_rate + sign * config.delta_c
    mr = sub.mutation_rate - sign * config.delta_m
    # rounding keeps repeated +/- steps from drifting off the 0.1/0.01 grid
    cr = round(min(max(cr, config.c_min), config.c_max), 12)
    mr = round(min(max(mr, config.m_min), config.m_max), 12)
    return cr, mr


def random_genome(num_cells: int, obstacles: np.ndarray, density: float, rng: np.random.Generator) -> np.ndarray:
    p = min(density / num_cells, 1.0)
    return (rng.random(num_cells) < p) & ~obstacles


def initialize(config: EvolverConfig, scenario, evaluate) -> list[SubPopulation]:
    """Random islands; ``evaluate(list_of_genomes)`` returns (objectives, violation) pairs."""
    obstacles = scenario.obstacles
    if obstacles.all():
        raise ValueError("obstacles cover every cell")
    islands = []
    for i in range(config.islands):
        genomes = [random_genome(scenario.num_cells, obstacles, config.init_density,
                                 stream(config.master_seed, INIT, 0, i, s))
                   for s in range(config.island_size)]
        members = [Individual(g, o, v) for g, (o, v) in zip(genomes, evaluate(genomes))]
        phis = [m.phi for m in members]
        eps = initial_epsilon(phis, min(config.theta, len(members))) if config.epsilon_schedule else 0.0
        if not config.constraint_handling:
            eps = float("inf")  # every violation is within tolerance: plain dominance
        sub = SubPopulation(members, config.cr0, config.mr0, eps, index=i, phi_max=max(phis, default=0.0))
        F, phi = sub.arrays()
        _, rank = nondominated_sort(F, phi, eps)
        for m, r in zip(members, rank):
            m.rank = int(r)
        sub.prev_best = snapshot(members)
        sub.rho = float(np.mean([m.feasible for m in members])) if members else 0.0
        islands.append(sub)
    return islands


def best_order(sub: SubPopulation) -> np.ndarray:
    """Member indices best first: epsilon-constrained rank, then violation, then f1."""
    F, phi = sub.arrays()
    _, rank = nondominated_sort(F, phi, sub.epsilon)
    return np.lexsort((np.arange(len(phi)), F[:, 0], phi, rank))


def worst_order(sub: SubPopulation) -> np.ndarray:
    """Member indices worst first: highest rank, then largest violation, then the
    most crowded reference niche, then largest f1.

    Crowding rather than f1 decides among equals so that replacement thins
    the densest part of the front instead of trimming one end of it.
    """
    F, phi = sub.arrays()
    _, rank = nondominated_sort(F, phi, sub.epsilon)
    niche = np.array([m.niche for m in sub.members])
    _, inverse, counts = np.unique(niche, return_inverse=True, return_counts=True)
    crowd = counts[inverse]
    return np.lexsort((-np.arange(len(phi)), -F[:, 0], -crowd, -phi, -rank))


def migrate(islands: list[SubPopulation], config: EvolverConfig) -> list[SubPopulation]:
    """Every island sends copies of its best members and overwrites its worst with the others' emigrants."""
    m = len(islands)
    if m < 2:
        return islands
    n_em = config.emigrants
    for sub in islands:
        if (m - 1) * n_em > len(sub.members):
            raise ValueError("(islands - 1) * emigrants exceeds the island size")
    if n_em == 0:
        return islands
    emigrants = [[sub.members[k].copy() for k in best_order(sub)[:n_em]] for sub in islands]
    for i, sub in enumerate(islands):
        incoming = [ind.copy() for j in range(m) if j != i for ind in emigrants[j]]
        worst = worst_order(sub)[:len(incoming)]
        for slot, ind in zip(worst, incoming):
            sub.members[slot] = ind
    return islands
