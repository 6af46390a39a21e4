from __future__ import annotations

from dataclasses import dataclass, replace

AM_NSGA3_C = "am-nsga-iii-c"
AM_NSGA3 = "am-nsga-iii"
NSGA3 = "nsga-iii"


@dataclass(frozen=True)
class EvolverConfig:
    """Island-model NSGA-III settings.

    ``adaptive_rates``, ``epsilon_schedule`` and ``constraint_handling`` exist
    so the plain NSGA-III baseline (one island, fixed rates, selection on
    objectives alone) runs on the same engine; see :meth:`baseline`.
    """

    population: int = 360
    islands: int = 3
    generations: int = 50
    cr0: float = 0.5
    c_min: float = 0.2
    c_max: float = 1.0
    mr0: float = 0.05
    m_min: float = 0.0
    m_max: float = 0.1
    delta_c: float = 0.1
    delta_m: float = 0.01
    theta: int = 18
    alpha: float = 0.95
    tau: float = 0.1
    emigrant_fraction: float = 0.10
    d_min_m: float = 30.0
    calibrate: bool = True
    init_density: float = 30.0
    n_mut: int = 3
    reference_point_divisions: int = 12
    master_seed: int = 0
    adaptive_rates: bool = True
    epsilon_schedule: bool = True
    constraint_handling: bool = True
    label: str = ""

    def __post_init__(self):
        if self.population < 1 or self.islands < 1:
            raise ValueError("population and islands must be >= 1")
        if self.population % self.islands:
            raise ValueError(f"population {self.population} is not divisible by {self.islands} islands")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if not (0 <= self.c_min <= self.c_max <= 1 and self.c_min <= self.cr0 <= self.c_max):
            raise ValueError("crossover rates must satisfy 0 <= c_min <= cr0 <= c_max <= 1")
        if not (0 <= self.m_min <= self.m_max <= 1 and self.m_min <= self.mr0 <= self.m_max):
            raise ValueError("mutation rates must satisfy 0 <= m_min <= mr0 <= m_max <= 1")
        if self.delta_c < 0 or self.delta_m < 0:
            raise ValueError("rate steps must be >= 0")
        if not 0 <= self.theta <= self.population:
            raise ValueError("theta must lie in [0, population]")
        for name in ("alpha", "tau", "emigrant_fraction"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not self.d_min_m > 0:
            raise ValueError("d_min_m must be > 0")
        if self.init_density < 0:
            raise ValueError("init_density must be >= 0")
        if self.n_mut < 1:
            raise ValueError("n_mut must be >= 1")
        if self.reference_point_divisions < 1:
            raise ValueError("reference_point_divisions must be >= 1")
        if self.islands > 1 and (self.islands - 1) * self.emigrants > self.island_size:
            raise ValueError("(islands - 1) * emigrants exceeds the island size")

    @property
    def island_size(self) -> int:
        return self.population // self.islands

    @property
    def emigrants(self) -> int:
        return int(round(self.emigrant_fraction * self.island_size))

    @property
    def variant(self) -> str:
        if self.label:
            return self.label
        if not (self.adaptive_rates or self.epsilon_schedule or self.calibrate or self.constraint_handling):
            return NSGA3
        return AM_NSGA3_C if self.calibrate else AM_NSGA3

    @classmethod
    def baseline(cls, **kwargs) -> "EvolverConfig":
        """Plain single-population NSGA-III that ranks on objectives only."""
        kwargs.setdefault("islands", 1)
        return cls(adaptive_rates=False, epsilon_schedule=False, calibrate=False,
                   constraint_handling=False, **kwargs)

    def with_variant(self, name: str) -> "EvolverConfig":
        if name == AM_NSGA3_C:
            return replace(self, calibrate=True, adaptive_rates=True, epsilon_schedule=True,
                           constraint_handling=True)
        if name == AM_NSGA3:
            return replace(self, calibrate=False, adaptive_rates=True, epsilon_schedule=True,
                           constraint_handling=True)
        if name == NSGA3:
            return replace(self, islands=1, calibrate=False, adaptive_rates=False,
                           epsilon_schedule=False, constraint_handling=False)
        raise ValueError(f"unknown variant {name!r}")
