"""Vehicle-to-RSU assignment strategies and the delay/load bookkeeping around them.

Every period is solved on its own. The total delay of a period decomposes
into per-RSU group costs, ``sum(trans) + n * Q(n)``, plus ``cellular_delay_s``
for each vehicle on cellular, which makes single-vehicle moves O(1) to price.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .radio import CELLULAR as CELLULAR_POLICY
from .radio import LinkBudgetParams, LinkTable, QueueParams
from .scenario import ABSENT, GridScenario

CELLULAR = -1
NOT_PRESENT = -2

IBRSG = "ibrsg"
NEAREST = "nearest"
STRONGEST = "strongest"
RANDOM = "random"
STRATEGIES = (IBRSG, NEAREST, STRONGEST, RANDOM)
# names used for the same strategies in the comparison literature
ALIASES = {"mindis": NEAREST, "minpl": STRONGEST}


@dataclass(frozen=True)
class OffloadConfig:
    strategy: str = IBRSG
    error_threshold: int = 0
    max_sweeps: int = 20
    seed: int = 0

    def __post_init__(self):
        name = ALIASES.get(self.strategy.lower(), self.strategy.lower())
        if name not in STRATEGIES:
            raise ValueError(f"unknown offloading strategy {self.strategy!r}")
        object.__setattr__(self, "strategy", name)
        if self.error_threshold < 0:
            raise ValueError("error_threshold must be >= 0")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")


@dataclass
class Assignment:
    """Per period, per vehicle target: an RSU cell index, ``CELLULAR`` or ``NOT_PRESENT``."""

    targets: np.ndarray  # (T, V) int64
    sweeps: list[int] = field(default_factory=list)

    def arrivals(self, t: int) -> dict[int, int]:
        row = self.targets[t]
        cells, counts = np.unique(row[row >= 0], return_counts=True)
        return {int(c): int(n) for c, n in zip(cells, counts)}

    def loads(self, t: int, rsus) -> np.ndarray:
        arr = self.arrivals(t)
        return np.array([arr.get(int(r), 0) for r in rsus], dtype=float)

    @property
    def total_sweeps(self) -> int:
        return int(sum(self.sweeps))


def _rsus(deployment) -> np.ndarray:
    return np.flatnonzero(np.asarray(deployment, dtype=bool))


def _links(scenario, params, links):
    return links if links is not None else LinkTable(scenario, params)


def _empty_targets(scenario: GridScenario) -> np.ndarray:
    pos = scenario.positions.T
    return np.where(pos == ABSENT, NOT_PRESENT, CELLULAR).astype(np.int64)


# a candidate must beat the incumbent by more than this; near-ties keep the
# earlier option (stay, then cellular, then lowest cell index)
_TOL = 1e-12


class _GroupCost:
    """Cost of one RSU group as a function of its size and summed transmission delay."""

    def __init__(self, params: LinkBudgetParams, q: QueueParams):
        self.mu = q.service_rate
        self.cd = params.cellular_delay_s
        self.penalty = q.penalty_s
        self.cellular_policy = q.saturation_policy == CELLULAR_POLICY

    def __call__(self, n: int, s: float) -> float:
        if n == 0:
            return 0.0
        if n < self.mu:
            return s + n / (self.mu - n)
        if self.cellular_policy:
            return n * self.cd
        return s + n * self.penalty


def _period_candidates(links: LinkTable, rows: np.ndarray, rsus: np.ndarray):
    """Per present vehicle: list of (rsu slot, transmission delay) in coverage."""
    if len(rsus) == 0:
        return [[] for _ in rows]
    mat = links.trans_matrix(rsus)[rows]
    r, c = np.nonzero(np.isfinite(mat))
    bounds = np.searchsorted(r, np.arange(len(rows) + 1)).tolist()
    pairs = list(zip(c.tolist(), mat[r, c].tolist()))
    return [pairs[bounds[k]:bounds[k + 1]] for k in range(len(rows))]


def _sweep_separable(cands, cur, cur_t, n, cost: _GroupCost, cd: float, n_vehicles: int,
                     cfg: OffloadConfig, notify=None) -> int:
    """Best-response sweeps when a group costs ``s + h(n)`` (penalty policy).

    A move's change in total delay then only needs the marginal queue cost
    ``h(n + 1) - h(n)``, tabulated once. Same visiting order, tie-breaking
    and acceptance rule as the general loop in :func:`assign_ibrsg`.
    """
    h = [cost(k, 0.0) for k in range(n_vehicles + 2)]
    inc = [h[k + 1] - h[k] for k in range(n_vehicles + 1)]
    n_sweeps = 0
    while True:
        n_sweeps += 1
        changed = 0
        for k, c in enumerate(cands):
            if not c:
                continue
            a = cur[k]
            if a < 0:
                saving = cd
                best_delta, best, best_t = 0.0, a, 0.0
            else:
                saving = cur_t[k] + inc[n[a] - 1]
                best_delta, best, best_t = 0.0, a, cur_t[k]
                if cd - saving < -_TOL:
                    best_delta, best, best_t = cd - saving, -1, 0.0
            for slot, tr in c:
                if slot == a:
                    continue
                d = tr + inc[n[slot]] - saving
                if d < best_delta - _TOL:
                    best_delta, best, best_t = d, slot, tr
            if best != a:
                if a >= 0:
                    n[a] -= 1
                if best >= 0:
                    n[best] += 1
                cur[k], cur_t[k] = best, best_t
                changed += 1
            if notify is not None:
                notify(k)
        if changed <= cfg.error_threshold or n_sweeps >= cfg.max_sweeps:
            return n_sweeps


def assign_ibrsg(scenario: GridScenario, deployment, params: LinkBudgetParams, q: QueueParams,
                 cfg: OffloadConfig = OffloadConfig(), links: LinkTable | None = None,
                 seed: int | None = None, on_update=None) -> Assignment:
    """Iterated sequential best response on total system delay.

    Each vehicle in index order moves to the target (cellular or an RSU in
    coverage) that minimizes the period's total delay given everyone else's
    current choice; it only moves on a strict improvement, so total delay
    never increases. Sweeps stop once at most ``cfg.error_threshold``
    vehicles changed target, or after ``cfg.max_sweeps``.

    ``on_update(t, v, targets_row)`` is called after every single-vehicle
    best-response step, for instrumentation.
    """
    links = _links(scenario, params, links)
    rsus = _rsus(deployment)
    targets = _empty_targets(scenario)
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    cost = _GroupCost(params, q)
    cd = params.cellular_delay_s
    sweeps = []
    for t in range(scenario.num_periods):
        present = np.flatnonzero(scenario.positions[:, t] != ABSENT)
        if len(present) == 0 or len(rsus) == 0:
            sweeps.append(0)
            continue
        cands = _period_candidates(links, links.row_of[scenario.positions[present, t]], rsus)
        # current slot per present vehicle, -1 for cellular
        cur = [-1] * len(present)
        cur_t = [0.0] * len(present)
        n = [0] * len(rsus)
        s = [0.0] * len(rsus)
        sizes = np.array([len(c) for c in cands])
        has = np.flatnonzero(sizes)
        picks = rng.integers(sizes[has]).tolist() if len(has) else []
        for k, pick in zip(has.tolist(), picks):
            slot, tr = cands[k][pick]
            cur[k], cur_t[k] = slot, tr
            n[slot] += 1
            s[slot] += tr
        if not cost.cellular_policy:
            notify = None
            if on_update is not None:
                def notify(k, t=t, present=present, cur=cur):
                    row = targets[t].copy()
                    row[present] = [CELLULAR if x < 0 else int(rsus[x]) for x in cur]
                    on_update(t, int(present[k]), row)
            n_sweeps = _sweep_separable(cands, cur, cur_t, n, cost, cd, len(present), cfg, notify)
            targets[t, present] = [CELLULAR if x < 0 else int(rsus[x]) for x in cur]
            sweeps.append(n_sweeps)
            continue
        group = [cost(n[j], s[j]) for j in range(len(rsus))]
        n_sweeps = 0
        while True:
            n_sweeps += 1
            changed = 0
            for k, c in enumerate(cands):
                if c:
                    a = cur[k]
                    if a < 0:
                        removal = -cd
                        new_a = 0.0
                        best_delta, best, best_t, best_group = 0.0, a, 0.0, 0.0
                    else:
                        new_a = cost(n[a] - 1, s[a] - cur_t[k])
                        removal = new_a - group[a]
                        # staying costs nothing; cellular is the first alternative
                        best_delta, best, best_t, best_group = 0.0, a, cur_t[k], group[a]
                        if removal + cd < -_TOL:
                            best_delta, best, best_t, best_group = removal + cd, -1, 0.0, 0.0
                    for slot, tr in c:
                        if slot == a:
                            continue
                        g = cost(n[slot] + 1, s[slot] + tr)
                        d = removal + g - group[slot]
                        if d < best_delta - _TOL:
                            best_delta, best, best_t, best_group = d, slot, tr, g
                    if best != a:
                        if a >= 0:
                            n[a] -= 1
                            s[a] -= cur_t[k]
                            group[a] = new_a
                        if best >= 0:
                            n[best] += 1
                            s[best] += best_t
                            group[best] = best_group
                        cur[k], cur_t[k] = best, best_t
                        changed += 1
                if on_update is not None:
                    row = targets[t].copy()
                    row[present] = [CELLULAR if x < 0 else int(rsus[x]) for x in cur]
                    on_update(t, int(present[k]), row)
            if changed <= cfg.error_threshold or n_sweeps >= cfg.max_sweeps:
                break
        targets[t, present] = [CELLULAR if x < 0 else int(rsus[x]) for x in cur]
        sweeps.append(n_sweeps)
    return Assignment(targets, sweeps)


def _argmin_assign(scenario, rsus, score_fn) -> Assignment:
    targets = _empty_targets(scenario)
    if len(rsus) == 0:
        return Assignment(targets, [0] * scenario.num_periods)
    for t in range(scenario.num_periods):
        present = np.flatnonzero(scenario.positions[:, t] != ABSENT)
        if len(present) == 0:
            continue
        score = score_fn(scenario.positions[present, t])  # (P, R), inf = unavailable
        best = np.argmin(score, axis=1)  # first minimum, rsus ascending -> lowest cell wins ties
        ok = np.isfinite(score[np.arange(len(present)), best])
        targets[t, present] = np.where(ok, rsus[best], CELLULAR)
    return Assignment(targets, [0] * scenario.num_periods)


def _distance_scores(scenario: GridScenario, rsus: np.ndarray, cells: np.ndarray) -> np.ndarray:
    diff = scenario.centers[cells][:, None, :] - scenario.centers[rsus][None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    return np.where(d <= scenario.coverage_radius_m, d, np.inf)


def assign_nearest(scenario: GridScenario, deployment, params=None, q=None) -> Assignment:
    """Each vehicle joins the closest RSU in coverage (lowest cell index on ties)."""
    rsus = _rsus(deployment)
    return _argmin_assign(scenario, rsus, lambda cells: _distance_scores(scenario, rsus, cells))


def assign_strongest(scenario: GridScenario, deployment, params: LinkBudgetParams,
                     q=None, links: LinkTable | None = None) -> Assignment:
    """Each vehicle joins the in-coverage RSU with the smallest total path loss."""
    links = _links(scenario, params, links)
    rsus = _rsus(deployment)
    loss = links.loss_matrix(rsus) if len(rsus) else None
    return _argmin_assign(scenario, rsus, lambda cells: loss[links.row_of[cells]])


def assign_random(scenario: GridScenario, deployment, seed: int) -> Assignment:
    """Each vehicle joins a uniformly drawn RSU in coverage."""
    rsus = _rsus(deployment)
    rng = np.random.default_rng(seed)
    targets = _empty_targets(scenario)
    if len(rsus) == 0:
        return Assignment(targets, [0] * scenario.num_periods)
    for t in range(scenario.num_periods):
        present = np.flatnonzero(scenario.positions[:, t] != ABSENT)
        if len(present) == 0:
            continue
        ok = np.isfinite(_distance_scores(scenario, rsus, scenario.positions[present, t]))
        counts = ok.sum(axis=1)
        has = counts > 0
        if not has.any():
            continue
        # r-th in-coverage RSU of each row, r uniform in [0, count)
        r = rng.integers(counts[has])
        pick = np.argmax(np.cumsum(ok[has], axis=1) > r[:, None], axis=1)
        targets[t, present[has]] = rsus[pick]
    return Assignment(targets, [0] * scenario.num_periods)


def assign(scenario: GridScenario, deployment, params: LinkBudgetParams, q: QueueParams,
           cfg: OffloadConfig = OffloadConfig(), links: LinkTable | None = None,
           seed: int | None = None) -> Assignment:
    """Dispatch to the strategy named in ``cfg``."""
    seed = cfg.seed if seed is None else seed
    if cfg.strategy == IBRSG:
        return assign_ibrsg(scenario, deployment, params, q, cfg, links=links, seed=seed)
    if cfg.strategy == NEAREST:
        return assign_nearest(scenario, deployment, params, q)
    if cfg.strategy == STRONGEST:
        return assign_strongest(scenario, deployment, params, q, links=links)
    return assign_random(scenario, deployment, seed)


def vehicle_delays(scenario: GridScenario, deployment, assignment: Assignment,
                   params: LinkBudgetParams, q: QueueParams,
                   links: LinkTable | None = None) -> np.ndarray:
    """(V, T) matrix of per-vehicle, per-period delay in seconds (0 when absent).

    Under the cellular saturation policy every vehicle on a saturated RSU is
    charged the cellular delay.
    """
    links = _links(scenario, params, links)
    rsus = _rsus(deployment)
    out = np.zeros((scenario.num_vehicles, scenario.num_periods))
    cd = params.cellular_delay_s
    mu = q.service_rate
    slot_of = np.full(scenario.num_cells, -1, dtype=np.int64)
    slot_of[rsus] = np.arange(len(rsus))
    trans = links.trans_matrix(rsus)
    for t in range(scenario.num_periods):
        row = assignment.targets[t]
        out[row == CELLULAR, t] = cd
        veh = np.flatnonzero(row >= 0)
        if len(veh) == 0:
            continue
        slots = slot_of[row[veh]]
        if np.any(slots < 0):
            bad = int(row[veh][slots < 0][0])
            raise ValueError(f"assignment uses cell {bad}, which holds no RSU")
        tr = trans[links.row_of[scenario.positions[veh, t]], slots]
        if not np.all(np.isfinite(tr)):
            bad = int(row[veh][~np.isfinite(tr)][0])
            raise ValueError(f"assignment links a vehicle outside the coverage of RSU {bad}")
        count = np.bincount(slots, minlength=len(rsus))[slots]
        unsat = count < mu
        queue = np.full(len(veh), q.penalty_s)
        queue[unsat] = 1.0 / (mu - count[unsat])
        d = tr + queue
        if q.saturation_policy == CELLULAR_POLICY:
            d[~unsat] = cd
        out[veh, t] = d
    return out


def total_assignment_delay(scenario: GridScenario, deployment, assignment: Assignment,
                           params: LinkBudgetParams, q: QueueParams,
                           links: LinkTable | None = None) -> float:
    return float(vehicle_delays(scenario, deployment, assignment, params, q, links).sum())


def load_balance(assignment: Assignment, num_rsus: int, rsus=None) -> float:
    """Population standard deviation of per-RSU loads, averaged over periods.

    ``rsus`` lists the deployed cells so idle RSUs count as zero load; when
    omitted only RSUs that appear in the assignment are known and the
    remaining ``num_rsus - len(used)`` are taken as idle.
    """
    if num_rsus < 1:
        raise ValueError("load balance needs at least one RSU")
    values = []
    for t in range(assignment.targets.shape[0]):
        if rsus is not None:
            loads = assignment.loads(t, rsus)
        else:
            used = list(assignment.arrivals(t).values())
            loads = np.array(used + [0] * (num_rsus - len(used)), dtype=float)
        values.append(load_balance_of(loads))
    return float(np.mean(values)) if values else 0.0


def load_balance_of(loads) -> float:
    loads = np.asarray(loads, dtype=float)
    if len(loads) == 0:
        raise ValueError("load balance needs at least one RSU")
    return float(math.sqrt(np.sum((loads - loads.mean()) ** 2) / len(loads)))
