"""Per-link delay model: free-space and shadowing loss, Shannon rate, M/M/1 queue.

The rate uses a conventional dB link budget (received power over thermal
noise in the channel bandwidth). Shadowing only applies when the straight
segment between the vehicle cell center and the RSU cell center crosses an
obstacle cell other than the two endpoint cells; its standard-normal sample
is fixed per (vehicle cell, RSU cell) pair by ``shadow_seed``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import GridScenario

MIN_DISTANCE_M = 1.0
PENALTY = "penalty"
CELLULAR = "cellular"


@dataclass(frozen=True)
class LinkBudgetParams:
    packet_bits: float = 1e6
    bandwidth_hz: float = 1e7
    tx_power_dbm: float = 23.0
    noise_dbm_per_hz: float = -174.0
    carrier_hz: float = 5.9e9
    shadow_sigma_db: float = 4.0
    cellular_delay_s: float = 2.0
    shadow_seed: int = 0

    def __post_init__(self):
        for name in ("packet_bits", "bandwidth_hz", "carrier_hz", "cellular_delay_s"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.shadow_sigma_db < 0:
            raise ValueError("shadow_sigma_db must be >= 0")


@dataclass(frozen=True)
class QueueParams:
    service_rate: float = 20.0
    saturation_policy: str = PENALTY
    penalty_s: float = 2.0

    def __post_init__(self):
        if not self.service_rate > 0:
            raise ValueError("service_rate must be > 0")
        if self.saturation_policy not in (PENALTY, CELLULAR):
            raise ValueError(f"unknown saturation policy {self.saturation_policy!r}")
        if not self.penalty_s > 0:
            raise ValueError("penalty_s must be > 0")


def free_space_path_loss(dis_m, carrier_hz):
    """Free-space loss in dB; works elementwise on arrays."""
    dis = np.asarray(dis_m, dtype=float)
    if np.any(dis <= 0) or carrier_hz <= 0:
        raise ValueError("distance and carrier frequency must be positive")
    out = 20.0 * np.log10(dis) + 20.0 * math.log10(carrier_hz) - 147.55
    return float(out) if out.ndim == 0 else out


def shadowing_loss(sigma_db, z):
    """Log-normal shadowing term ``10 * sigma * z``."""
    return 10.0 * sigma_db * z


def transmission_rate(params: LinkBudgetParams, loss_db):
    """Shannon rate in bit/s for a total path loss in dB."""
    noise_dbm = params.noise_dbm_per_hz + 10.0 * math.log10(params.bandwidth_hz)
    snr = np.power(10.0, (params.tx_power_dbm - np.asarray(loss_db, dtype=float) - noise_dbm) / 10.0)
    out = params.bandwidth_hz * np.log1p(snr) / math.log(2.0)
    return float(out) if out.ndim == 0 else out


def transmission_delay(packet_bits, rate):
    """Seconds to push one packet; an infinite delay marks an unusable link."""
    rate = np.asarray(rate, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(rate > 0, packet_bits / np.where(rate > 0, rate, 1.0), np.inf)
    return float(out) if out.ndim == 0 else out


def queuing_delay(q: QueueParams, arrivals) -> float | None:
    """M/M/1 sojourn ``1/(mu - lambda)``.

    At or beyond saturation this returns ``q.penalty_s`` under the penalty
    policy and ``None`` under the cellular policy, meaning the caller must
    route the vehicle over cellular.
    """
    if arrivals < 0:
        raise ValueError("arrivals must be >= 0")
    if arrivals < q.service_rate:
        return 1.0 / (q.service_rate - arrivals)
    return q.penalty_s if q.saturation_policy == PENALTY else None


def blocked_mask(scenario: GridScenario, sources: np.ndarray, target: int) -> np.ndarray:
    """For each source cell, whether the segment to ``target`` crosses an obstacle.

    Segments that only touch an obstacle cell at a corner or along an edge
    are not blocked; the two endpoint cells never block.
    """
    sources = np.asarray(sources, dtype=np.int64)
    obs = np.flatnonzero(scenario.obstacles)
    if len(obs) == 0 or len(sources) == 0:
        return np.zeros(len(sources), dtype=bool)
    c = scenario.cell_size_m
    a = scenario.centers[sources]                     # (S, 2)
    b = scenario.centers[target]                      # (2,)
    d = b - a                                          # (S, 2)
    orow, ocol = np.divmod(obs, scenario.width_cells)
    lo = np.stack([ocol * c, orow * c], axis=1)        # (O, 2)
    hi = lo + c
    tmin = np.zeros((len(sources), len(obs)))
    tmax = np.ones((len(sources), len(obs)))
    for ax in range(2):
        da = d[:, ax][:, None]
        aa = a[:, ax][:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (lo[:, ax][None, :] - aa) / da
            t2 = (hi[:, ax][None, :] - aa) / da
        lo_t = np.minimum(t1, t2)
        hi_t = np.maximum(t1, t2)
        flat = da == 0
        inside = (aa > lo[:, ax][None, :]) & (aa < hi[:, ax][None, :])
        lo_t = np.where(flat, np.where(inside, -np.inf, np.inf), lo_t)
        hi_t = np.where(flat, np.where(inside, np.inf, -np.inf), hi_t)
        tmin = np.maximum(tmin, lo_t)
        tmax = np.minimum(tmax, hi_t)
    hit = tmax - tmin > 1e-9
    hit &= obs[None, :] != sources[:, None]
    hit &= obs[None, :] != target
    return hit.any(axis=1)


def shadow_samples(params: LinkBudgetParams, scenario: GridScenario, rsu: int) -> np.ndarray:
    """Standard-normal shadowing samples for every vehicle cell against one RSU cell."""
    rng = np.random.default_rng([params.shadow_seed, int(rsu)])
    return rng.standard_normal(scenario.num_cells)


def path_loss_column(scenario: GridScenario, params: LinkBudgetParams, rsu: int,
                     sources: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Total loss (dB) from ``sources`` to ``rsu`` and the in-coverage mask."""
    sources = np.asarray(sources, dtype=np.int64)
    raw = np.hypot(*(scenario.centers[sources] - scenario.centers[rsu]).T)
    loss = free_space_path_loss(np.maximum(raw, MIN_DISTANCE_M), params.carrier_hz)
    blocked = blocked_mask(scenario, sources, rsu)
    if blocked.any():
        z = shadow_samples(params, scenario, rsu)[sources]
        loss = loss + np.where(blocked, shadowing_loss(params.shadow_sigma_db, z), 0.0)
    return np.atleast_1d(loss), raw <= scenario.coverage_radius_m


def link_delay(scenario: GridScenario, params: LinkBudgetParams, q: QueueParams,
               vehicle_pos: int, rsu_pos: int, arrivals_at_rsu: int) -> float | None:
    """Transmission plus queuing delay of one vehicle on one RSU.

    Returns ``None`` when the queue is saturated under the cellular policy or
    the link rate vanishes; coverage is the caller's responsibility.
    """
    for idx in (vehicle_pos, rsu_pos):
        if not 0 <= idx < scenario.num_cells:
            raise IndexError(f"cell index {idx} outside [0, {scenario.num_cells})")
    loss, _ = path_loss_column(scenario, params, rsu_pos, np.array([vehicle_pos]))
    trans = transmission_delay(params.packet_bits, transmission_rate(params, float(loss[0])))
    queue = queuing_delay(q, arrivals_at_rsu)
    if queue is None or math.isinf(trans):
        return None
    return trans + queue


class LinkTable:
    """Lazily cached per-RSU loss and transmission-delay columns.

    Rows are the scenario's occupied cells (cells some vehicle visits);
    ``row_of[cell]`` maps a cell index to its row, -1 if never occupied.
    Out-of-coverage entries carry an infinite transmission delay.
    """

    def __init__(self, scenario: GridScenario, params: LinkBudgetParams):
        self.scenario = scenario
        self.params = params
        self.cells = np.flatnonzero(scenario.presence_counts > 0)
        self.row_of = np.full(scenario.num_cells, -1, dtype=np.int64)
        self.row_of[self.cells] = np.arange(len(self.cells))
        self._loss: dict[int, np.ndarray] = {}
        self._trans: dict[int, np.ndarray] = {}
        # dense copy of the cached transmission columns, indexed by cell
        self._dense = np.full((len(self.cells), scenario.num_cells), np.inf)
        self._have = np.zeros(scenario.num_cells, dtype=bool)

    def loss(self, rsu: int) -> np.ndarray:
        """Path loss column; ``inf`` outside coverage."""
        rsu = int(rsu)
        col = self._loss.get(rsu)
        if col is None:
            loss, in_range = path_loss_column(self.scenario, self.params, rsu, self.cells)
            col = np.where(in_range, loss, np.inf)
            self._loss[rsu] = col
        return col

    def trans(self, rsu: int) -> np.ndarray:
        rsu = int(rsu)
        col = self._trans.get(rsu)
        if col is None:
            loss = self.loss(rsu)
            finite = np.isfinite(loss)
            col = np.full(len(loss), np.inf)
            if finite.any():
                rate = transmission_rate(self.params, loss[finite])
                col[finite] = transmission_delay(self.params.packet_bits, rate)
            self._trans[rsu] = col
            self._dense[:, rsu] = col
            self._have[rsu] = True
        return col

    def trans_matrix(self, rsus) -> np.ndarray:
        """(occupied cells, len(rsus)) matrix of transmission delays."""
        if len(rsus) == 0:
            return np.empty((len(self.cells), 0))
        rsus = np.asarray(rsus, dtype=np.int64)
        for r in rsus[~self._have[rsus]]:
            self.trans(r)
        return self._dense[:, rsus]

    def loss_matrix(self, rsus) -> np.ndarray:
        if len(rsus) == 0:
            return np.empty((len(self.cells), 0))
        return np.column_stack([self.loss(r) for r in rsus])
