"""Gridded urban scenario: obstacles, vehicle traces and latency-sensitive areas.

Cells are indexed row-major, ``idx = row * width_cells + col``; the center of a
cell sits at ``((col + 0.5) * cell_size_m, (row + 0.5) * cell_size_m)``.
Vehicles are snapped to cells, so every distance in the model is a distance
between cell centers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

ABSENT = -1


class ScenarioError(ValueError):
    """Raised when a scenario file or synthetic spec is malformed."""


@dataclass(frozen=True)
class VehicleTrace:
    vehicle_id: str
    # one cell index per period, ABSENT when the vehicle is not on the map
    positions: tuple[int, ...]


@dataclass(frozen=True)
class SensitiveArea:
    center_x_m: float
    center_y_m: float
    radius_m: float = 20.0


@dataclass(frozen=True, eq=False)
class GridScenario:
    width_cells: int
    height_cells: int
    cell_size_m: float
    obstacle_mask: tuple[bool, ...]
    traces: tuple[VehicleTrace, ...]
    sensitive_areas: tuple[SensitiveArea, ...] = ()
    period_length_s: float = 30.0
    num_periods: int = 1
    coverage_radius_m: float = 300.0

    def __post_init__(self):
        _validate(self)

    def __eq__(self, other):
        if not isinstance(other, GridScenario):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(json.dumps(self.to_dict(), sort_keys=True))

    @property
    def num_cells(self) -> int:
        return self.width_cells * self.height_cells

    @property
    def num_vehicles(self) -> int:
        return len(self.traces)

    @cached_property
    def obstacles(self) -> np.ndarray:
        """Boolean obstacle mask as an array of length K."""
        arr = np.array(self.obstacle_mask, dtype=bool)
        arr.flags.writeable = False
        return arr

    @cached_property
    def positions(self) -> np.ndarray:
        """(V, T) int array of per-period cell indices, ``ABSENT`` where missing."""
        arr = np.full((self.num_vehicles, self.num_periods), ABSENT, dtype=np.int64)
        for i, tr in enumerate(self.traces):
            arr[i] = tr.positions
        arr.flags.writeable = False
        return arr

    @cached_property
    def centers(self) -> np.ndarray:
        """(K, 2) array of cell-center coordinates in meters."""
        idx = np.arange(self.num_cells)
        rows, cols = np.divmod(idx, self.width_cells)
        arr = np.column_stack([(cols + 0.5) * self.cell_size_m, (rows + 0.5) * self.cell_size_m])
        arr.flags.writeable = False
        return arr

    @cached_property
    def presence_counts(self) -> np.ndarray:
        """Number of (vehicle, period) presences per cell."""
        pos = self.positions[self.positions != ABSENT]
        arr = np.bincount(pos, minlength=self.num_cells)
        arr.flags.writeable = False
        return arr

    @cached_property
    def sensitive_vehicles(self) -> np.ndarray:
        """Mask of vehicles that sit inside any sensitive area in at least one period."""
        mask = np.zeros(self.num_vehicles, dtype=bool)
        if not self.sensitive_areas or self.num_vehicles == 0:
            return mask
        pos = self.positions
        present = pos != ABSENT
        xy = self.centers[np.where(present, pos, 0)]
        for area in self.sensitive_areas:
            d = np.hypot(xy[..., 0] - area.center_x_m, xy[..., 1] - area.center_y_m)
            mask |= np.any(present & (d <= area.radius_m), axis=1)
        return mask

    def to_dict(self) -> dict:
        return {
            "grid": {
                "width": self.width_cells,
                "height": self.height_cells,
                "cell_size_m": self.cell_size_m,
            },
            "obstacles": [i for i, o in enumerate(self.obstacle_mask) if o],
            "periods": {"count": self.num_periods, "length_s": self.period_length_s},
            "coverage_radius_m": self.coverage_radius_m,
            "sensitive_areas": [
                {"x_m": a.center_x_m, "y_m": a.center_y_m, "radius_m": a.radius_m}
                for a in self.sensitive_areas
            ],
            "traces": [
                {"id": t.vehicle_id, "positions": [None if p == ABSENT else p for p in t.positions]}
                for t in self.traces
            ],
        }


def _validate(s: GridScenario) -> None:
    if s.width_cells < 1 or s.height_cells < 1:
        raise ScenarioError("grid dimensions must be positive")
    if not s.cell_size_m > 0:
        raise ScenarioError("cell_size_m must be > 0")
    if not s.coverage_radius_m > 0:
        raise ScenarioError("coverage_radius_m must be > 0")
    if not s.period_length_s > 0:
        raise ScenarioError("period length must be > 0")
    if s.num_periods < 1:
        raise ScenarioError("num_periods must be >= 1")
    k = s.width_cells * s.height_cells
    if len(s.obstacle_mask) != k:
        raise ScenarioError(f"obstacle mask has {len(s.obstacle_mask)} entries, expected {k}")
    for tr in s.traces:
        if len(tr.positions) != s.num_periods:
            raise ScenarioError(
                f"trace {tr.vehicle_id!r} has {len(tr.positions)} positions, expected {s.num_periods}"
            )
        for p in tr.positions:
            if p != ABSENT and not 0 <= p < k:
                raise ScenarioError(f"trace {tr.vehicle_id!r} references cell {p} outside [0, {k})")
    width_m = s.width_cells * s.cell_size_m
    height_m = s.height_cells * s.cell_size_m
    for a in s.sensitive_areas:
        if not a.radius_m > 0:
            raise ScenarioError("sensitive area radius must be > 0")
        if not (0 <= a.center_x_m <= width_m and 0 <= a.center_y_m <= height_m):
            raise ScenarioError(f"sensitive area center ({a.center_x_m}, {a.center_y_m}) outside the map")


def scenario_from_dict(data: dict) -> GridScenario:
    try:
        grid = data["grid"]
        width, height = int(grid["width"]), int(grid["height"])
        k = width * height
        obstacles = [int(i) for i in data.get("obstacles", [])]
        for i in obstacles:
            if not 0 <= i < k:
                raise ScenarioError(f"obstacle cell {i} outside [0, {k})")
        obstacle_set = set(obstacles)
        periods = data.get("periods", {})
        traces = tuple(
            VehicleTrace(
                str(t["id"]),
                tuple(ABSENT if p is None else int(p) for p in t["positions"]),
            )
            for t in data.get("traces", [])
        )
        areas = tuple(
            SensitiveArea(float(a["x_m"]), float(a["y_m"]), float(a.get("radius_m", 20.0)))
            for a in data.get("sensitive_areas", [])
        )
        return GridScenario(
            width_cells=width,
            height_cells=height,
            cell_size_m=float(grid["cell_size_m"]),
            obstacle_mask=tuple(i in obstacle_set for i in range(k)),
            traces=traces,
            sensitive_areas=areas,
            period_length_s=float(periods.get("length_s", 30.0)),
            num_periods=int(periods.get("count", 1)),
            coverage_radius_m=float(data.get("coverage_radius_m", 300.0)),
        )
    except ScenarioError:
        raise
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario: {exc!r}") from exc


def load_scenario(path) -> GridScenario:
    """Read and validate a scenario JSON file."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: top level must be an object")
    return scenario_from_dict(data)


def save_scenario(scenario: GridScenario, path) -> None:
    Path(path).write_text(json.dumps(scenario.to_dict(), indent=1) + "\n", encoding="utf-8")


def _check_index(scenario: GridScenario, idx) -> int:
    idx = int(idx)
    if not 0 <= idx < scenario.num_cells:
        raise IndexError(f"cell index {idx} outside [0, {scenario.num_cells})")
    return idx


def cell_center(scenario: GridScenario, idx: int) -> tuple[float, float]:
    idx = _check_index(scenario, idx)
    row, col = divmod(idx, scenario.width_cells)
    return ((col + 0.5) * scenario.cell_size_m, (row + 0.5) * scenario.cell_size_m)


def distance_m(scenario: GridScenario, a: int, b: int) -> float:
    ax, ay = cell_center(scenario, a)
    bx, by = cell_center(scenario, b)
    return float(np.hypot(ax - bx, ay - by))


def traffic_volume(scenario: GridScenario, idx: int, radius_m: float) -> int:
    """Vehicle presences, summed over periods, within ``radius_m`` of a cell center."""
    idx = _check_index(scenario, idx)
    if not radius_m > 0:
        raise ValueError("radius_m must be > 0")
    d = np.hypot(*(scenario.centers - scenario.centers[idx]).T)
    return int(scenario.presence_counts[d <= radius_m].sum())


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the desk-scale scenario generator.

    Roads are the rows and columns whose index is a multiple of
    ``road_spacing``; obstacle blocks never cover road cells. Each period a
    vehicle takes up to ``step_cells`` moves to a 4-neighbour free cell,
    preferring road cells with probability ``road_bias``.
    """

    width: int = 20
    height: int = 20
    cell_size_m: float = 20.0
    obstacle_blocks: int = 4
    block_min: int = 2
    block_max: int = 4
    vehicles: int = 60
    periods: int = 4
    road_spacing: int = 4
    road_bias: float = 0.8
    step_cells: int = 3
    presence: float = 1.0
    sensitive_areas: int = 2
    sensitive_radius_m: float = 20.0
    coverage_radius_m: float = 300.0
    period_length_s: float = 30.0
    extra_obstacles: tuple[int, ...] = field(default=())


def synth_scenario(seed: int, spec: SyntheticSpec = SyntheticSpec()) -> GridScenario:
    """Generate a deterministic road-grid scenario from ``seed``."""
    rng = np.random.default_rng(seed)
    w, h = spec.width, spec.height
    k = w * h
    if w < 1 or h < 1 or spec.periods < 1 or spec.vehicles < 0:
        raise ScenarioError("synthetic spec needs positive grid and period counts")
    rows, cols = np.divmod(np.arange(k), w)
    if spec.road_spacing > 0:
        road = (rows % spec.road_spacing == 0) | (cols % spec.road_spacing == 0)
    else:
        road = np.zeros(k, dtype=bool)

    obstacle = np.zeros(k, dtype=bool)
    for _ in range(spec.obstacle_blocks):
        bh = int(rng.integers(spec.block_min, spec.block_max + 1))
        bw = int(rng.integers(spec.block_min, spec.block_max + 1))
        r0 = int(rng.integers(0, max(h - bh, 0) + 1))
        c0 = int(rng.integers(0, max(w - bw, 0) + 1))
        block = (rows >= r0) & (rows < r0 + bh) & (cols >= c0) & (cols < c0 + bw)
        obstacle |= block & ~road
    for i in spec.extra_obstacles:
        obstacle[i] = True
    free = ~obstacle
    if not free.any():
        raise ScenarioError("obstacles cover every cell")

    free_cells = np.flatnonzero(free)
    road_cells = np.flatnonzero(free & road)
    neighbours = []
    for i in range(k):
        r, c = divmod(i, w)
        nb = [(r + dr) * w + (c + dc) for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1))
              if 0 <= r + dr < h and 0 <= c + dc < w]
        neighbours.append([n for n in nb if free[n]])

    traces = []
    for v in range(spec.vehicles):
        pool = road_cells if (len(road_cells) and rng.random() < spec.road_bias) else free_cells
        cell = int(pool[rng.integers(len(pool))])
        positions = []
        for _t in range(spec.periods):
            positions.append(cell if rng.random() < spec.presence else ABSENT)
            for _ in range(int(rng.integers(0, spec.step_cells + 1))):
                nb = neighbours[cell]
                if not nb:
                    break
                on_road = [n for n in nb if road[n]]
                choices = on_road if (on_road and rng.random() < spec.road_bias) else nb
                cell = int(choices[rng.integers(len(choices))])
        traces.append(VehicleTrace(f"v{v}", tuple(positions)))

    crossings = np.flatnonzero(free & (rows % max(spec.road_spacing, 1) == 0)
                               & (cols % max(spec.road_spacing, 1) == 0))
    candidates = crossings if len(crossings) >= spec.sensitive_areas else free_cells
    picks = rng.choice(len(candidates), size=min(spec.sensitive_areas, len(candidates)), replace=False)
    areas = []
    for p in sorted(int(x) for x in picks):
        r, c = divmod(int(candidates[p]), w)
        areas.append(SensitiveArea((c + 0.5) * spec.cell_size_m, (r + 0.5) * spec.cell_size_m,
                                   spec.sensitive_radius_m))

    return GridScenario(
        width_cells=w,
        height_cells=h,
        cell_size_m=spec.cell_size_m,
        obstacle_mask=tuple(bool(o) for o in obstacle),
        traces=tuple(traces),
        sensitive_areas=tuple(areas),
        period_length_s=spec.period_length_s,
        num_periods=spec.periods,
        coverage_radius_m=spec.coverage_radius_m,
    )


def traffic_volume_map(scenario: GridScenario, radius_m: float) -> np.ndarray:
    """``traffic_volume`` for every cell at once; cached on the scenario."""
    cache = scenario.__dict__.setdefault("_volume_maps", {})
    vol = cache.get(radius_m)
    if vol is None:
        counts = scenario.presence_counts
        occupied = np.flatnonzero(counts > 0)
        vol = np.zeros(scenario.num_cells, dtype=np.int64)
        if len(occupied):
            for start in range(0, scenario.num_cells, 512):
                block = scenario.centers[start:start + 512]
                d = np.hypot(block[:, None, 0] - scenario.centers[occupied][None, :, 0],
                             block[:, None, 1] - scenario.centers[occupied][None, :, 1])
                vol[start:start + 512] = (d <= radius_m) @ counts[occupied]
        vol.flags.writeable = False
        cache[radius_m] = vol
    return vol
