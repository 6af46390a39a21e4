from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import EvolverConfig


@dataclass
class EpsilonState:
    epsilon: float = 0.0
    phi_max: float = 0.0      # largest overall violation seen so far
    rho: float = 0.0          # feasible ratio of the current generation
    phis: tuple = ()          # violations of the initial population, used at g = 0


def initial_epsilon(phis, theta: int) -> float:
    """Sum of the ``theta`` smallest violations."""
    phis = np.sort(np.asarray(phis, dtype=float))
    return float(phis[: max(int(theta), 0)].sum())


def epsilon_update(state: EpsilonState, g: int, config: EvolverConfig) -> float:
    if g < 0:
        raise ValueError("generation must be >= 0")
    if g >= config.generations:
        return 0.0
    if g == 0:
        return initial_epsilon(state.phis, config.theta)
    if state.rho < config.alpha:
        return (1.0 - config.tau) * state.epsilon
    return (1.0 + config.tau) * state.phi_max
