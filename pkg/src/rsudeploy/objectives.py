"""Objective and constraint evaluation for a binary RSU deployment.

A deployment is a boolean numpy array with one entry per grid cell.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .offloading import OffloadConfig, assign, vehicle_delays
from .radio import LinkBudgetParams, LinkTable, QueueParams
from .scenario import GridScenario


@dataclass(frozen=True)
class ObjectiveVector:
    f1_total_delay_s: float
    f2_max_sensitive_delay_s: float
    f3_rsu_count: int

    def as_array(self) -> np.ndarray:
        return np.array([self.f1_total_delay_s, self.f2_max_sensitive_delay_s, self.f3_rsu_count], dtype=float)


@dataclass(frozen=True)
class ViolationReport:
    obstacle_violation_m: float
    spacing_violation_m: float
    phi: float


def make_deployment(scenario: GridScenario, cells=()) -> np.ndarray:
    bits = np.zeros(scenario.num_cells, dtype=bool)
    bits[list(cells)] = True
    return bits


def _bits(scenario: GridScenario, deployment) -> np.ndarray:
    bits = np.asarray(deployment, dtype=bool)
    if bits.shape != (scenario.num_cells,):
        raise ValueError(f"deployment has shape {bits.shape}, expected ({scenario.num_cells},)")
    return bits


def genome_key(bits: np.ndarray) -> bytes:
    return hashlib.blake2b(np.packbits(bits).tobytes(), digest_size=16).digest()


def genome_seed(base_seed: int, bits: np.ndarray) -> int:
    """Seed for the offloading game that depends only on the genome and a base seed."""
    digest = hashlib.blake2b(np.packbits(bits).tobytes(), digest_size=8,
                             key=int(base_seed).to_bytes(8, "little", signed=True)).digest()
    return int.from_bytes(digest, "little")


def eval_objectives(scenario: GridScenario, deployment, params: LinkBudgetParams, q: QueueParams,
                    offload_cfg: OffloadConfig = OffloadConfig(), links: LinkTable | None = None,
                    seed: int | None = None) -> ObjectiveVector:
    bits = _bits(scenario, deployment)
    links = links if links is not None else LinkTable(scenario, params)
    assignment = assign(scenario, bits, params, q, offload_cfg, links=links, seed=seed)
    per_vehicle = vehicle_delays(scenario, bits, assignment, params, q, links).sum(axis=1)
    sensitive = scenario.sensitive_vehicles
    f2 = float(per_vehicle[sensitive].max()) if sensitive.any() else 0.0
    return ObjectiveVector(float(per_vehicle.sum()), f2, int(bits.sum()))


def obstacle_violation(scenario: GridScenario, deployment) -> float:
    """Summed distance from each RSU standing on an obstacle to the nearest free space.

    Free space is the union of non-obstacle cells; the distance from a cell
    center to the closest free cell square equals the distance to the
    nearest edge of the obstacle region around it.
    """
    bits = _bits(scenario, deployment)
    on_obstacle = np.flatnonzero(bits & scenario.obstacles)
    if len(on_obstacle) == 0:
        return 0.0
    free = np.flatnonzero(~scenario.obstacles)
    if len(free) == 0:
        raise ValueError("scenario has no free cell")
    half = scenario.cell_size_m / 2.0
    total = 0.0
    for cell in on_obstacle:
        gap = np.abs(scenario.centers[free] - scenario.centers[cell]) - half
        gap = np.maximum(gap, 0.0)
        total += float(np.hypot(gap[:, 0], gap[:, 1]).min())
    return total


def spacing_violation(scenario: GridScenario, deployment, d_min_m: float) -> float:
    """Summed shortfall ``d_min - d`` over RSU pairs closer than ``d_min``."""
    if not d_min_m > 0:
        raise ValueError("d_min_m must be > 0")
    bits = _bits(scenario, deployment)
    cells = np.flatnonzero(bits)
    if len(cells) < 2:
        return 0.0
    d = pdist(scenario.centers[cells])
    short = d < d_min_m
    return float(np.sum(d_min_m - d[short]))


def overall_violation(obstacle_m: float, spacing_m: float) -> float:
    if obstacle_m < 0 or spacing_m < 0:
        raise ValueError("violations must be >= 0")
    return obstacle_m + spacing_m


def violation_report(scenario: GridScenario, deployment, d_min_m: float) -> ViolationReport:
    obs = obstacle_violation(scenario, deployment)
    spc = spacing_violation(scenario, deployment, d_min_m)
    return ViolationReport(obs, spc, overall_violation(obs, spc))


def is_feasible(report: ViolationReport) -> bool:
    return report.phi == 0


class Evaluator:
    """Evaluates genomes against one scenario with a shared link table and result cache.

    The offloading game is seeded from ``offload_cfg.seed`` and the genome
    itself, so a genome always maps to the same objectives regardless of
    when, where, or in which process it is evaluated.
    """

    def __init__(self, scenario: GridScenario, params: LinkBudgetParams, q: QueueParams,
                 offload_cfg: OffloadConfig, d_min_m: float):
        self.scenario = scenario
        self.params = params
        self.q = q
        self.offload_cfg = offload_cfg
        self.d_min_m = d_min_m
        self.links = LinkTable(scenario, params)
        self._cache: dict[bytes, tuple[ObjectiveVector, ViolationReport]] = {}

    def __call__(self, bits: np.ndarray) -> tuple[ObjectiveVector, ViolationReport]:
        key = genome_key(bits)
        hit = self._cache.get(key)
        if hit is None:
            seed = genome_seed(self.offload_cfg.seed, bits)
            obj = eval_objectives(self.scenario, bits, self.params, self.q, self.offload_cfg,
                                  links=self.links, seed=seed)
            hit = (obj, violation_report(self.scenario, bits, self.d_min_m))
            self._cache[key] = hit
        return hit

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_cache"] = {}
        return state
