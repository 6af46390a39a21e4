"""Constrained three-objective RSU deployment: scenario, delay model, offloading game,
island-model NSGA-III and front indicators."""

__version__ = "0.1.0"
