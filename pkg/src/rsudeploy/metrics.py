"""Front quality indicators: NPS/NFS counts, IGD, exact hypervolume, spacing.

All indicators assume minimization.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

log = logging.getLogger(__name__)


@dataclass
class Front:
    points: np.ndarray                    # (n, 3) objective vectors
    feasible: np.ndarray                  # (n,) bool
    labels: tuple = field(default=())     # per point source label, e.g. algorithm name

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3) if len(self.points) else np.empty((0, 3))
        self.feasible = np.asarray(self.feasible, dtype=bool).reshape(-1)
        if len(self.feasible) != len(self.points):
            raise ValueError("feasible flags must match points")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("front points must be finite")
        if not self.labels:
            self.labels = ("",) * len(self.points)
        self.labels = tuple(self.labels)
        if len(self.labels) != len(self.points):
            raise ValueError("labels must match points")

    def __len__(self):
        return len(self.points)

    def subset(self, idx) -> "Front":
        idx = np.asarray(idx, dtype=np.int64)
        return Front(self.points[idx], self.feasible[idx], tuple(self.labels[i] for i in idx))

    def dedup(self) -> "Front":
        """Drop repeated (point, feasibility) rows, keeping the first occurrence."""
        seen = set()
        keep = []
        for i, (p, f) in enumerate(zip(self.points, self.feasible)):
            key = (tuple(p.tolist()), bool(f))
            if key not in seen:
                seen.add(key)
                keep.append(i)
        return self.subset(keep)


def dominates(a, b) -> bool:
    a = np.asarray(a)
    b = np.asarray(b)
    return bool(np.all(a <= b) and np.any(a < b))


def nondominated_mask(points) -> np.ndarray:
    """Mask of points not Pareto-dominated by any other point."""
    p = np.asarray(points, dtype=float)
    if len(p) == 0:
        return np.zeros(0, dtype=bool)
    le = np.all(p[:, None, :] <= p[None, :, :], axis=2)
    lt = np.any(p[:, None, :] < p[None, :, :], axis=2)
    dom = le & lt                    # dom[i, j]: i dominates j
    return ~dom.any(axis=0)


def count_nps_nfs(front: Front) -> tuple[int, int]:
    """Size of the non-dominated subset and how many of those are feasible."""
    if len(front) == 0:
        return 0, 0
    nd = nondominated_mask(front.points)
    return int(nd.sum()), int((nd & front.feasible).sum())


def normalize(points, lower, upper) -> np.ndarray:
    lower = np.asarray(lower, dtype=float)
    span = np.asarray(upper, dtype=float) - lower
    span = np.where(span > 0, span, 1.0)
    return (np.asarray(points, dtype=float) - lower) / span


def igd(front, reference, normalized: bool = False) -> float:
    """Mean distance from each reference point to its nearest front point.

    Unless ``normalized`` is set, both sets are first scaled to [0, 1] per
    objective by the reference set's extremes.
    """
    ref = np.asarray(reference, dtype=float).reshape(-1, 3) if len(reference) else np.empty((0, 3))
    if len(ref) == 0:
        raise ValueError("IGD needs a non-empty reference front")
    pts = np.asarray(front, dtype=float)
    if len(pts) == 0:
        return float("inf")
    pts = pts.reshape(-1, ref.shape[1])
    if not normalized:
        lo, hi = ref.min(axis=0), ref.max(axis=0)
        ref = normalize(ref, lo, hi)
        pts = normalize(pts, lo, hi)
    return float(cdist(ref, pts).min(axis=1).mean())


def _hv2d(xy: np.ndarray, rx: float, ry: float) -> float:
    area = 0.0
    cur_y = ry
    for x, y in xy[np.lexsort((xy[:, 1], xy[:, 0]))]:
        if y < cur_y:
            area += (rx - x) * (cur_y - y)
            cur_y = y
    return area


def hypervolume(points, ref_point=(1.1, 1.1, 1.1)) -> float:
    """Exact dominated hypervolume for 2 or 3 objectives by slicing along the last axis.

    Coordinates beyond the reference point are clipped to it (with a
    warning), so such points add no volume in that direction.
    """
    ref = np.asarray(ref_point, dtype=float)
    p = np.asarray(points, dtype=float)
    if p.size == 0:
        return 0.0
    p = p.reshape(-1, len(ref))
    if np.any(p > ref):
        log.warning("clipping %d point(s) beyond the hypervolume reference point",
                    int(np.any(p > ref, axis=1).sum()))
        p = np.minimum(p, ref)
    p = p[np.all(p < ref, axis=1)]
    if len(p) == 0:
        return 0.0
    if len(ref) == 1:
        return float(ref[0] - p[:, 0].min())
    if len(ref) == 2:
        return _hv2d(p, ref[0], ref[1])
    if len(ref) != 3:
        raise ValueError("hypervolume supports up to three objectives")
    p = p[np.argsort(p[:, 2], kind="stable")]
    volume = 0.0
    for i in range(len(p)):
        z_next = p[i + 1, 2] if i + 1 < len(p) else ref[2]
        if z_next > p[i, 2]:
            volume += _hv2d(p[: i + 1, :2], ref[0], ref[1]) * (z_next - p[i, 2])
    return float(volume)


def spacing(front) -> float:
    """Sample standard deviation of nearest-neighbour distances (Schott's spacing)."""
    p = np.asarray(front, dtype=float)
    if len(p) < 2:
        raise ValueError("spacing needs at least two points")
    d = cdist(p, p)
    np.fill_diagonal(d, np.inf)
    return float(np.std(d.min(axis=1), ddof=1))


def merge_pareto(fronts: list[Front]) -> Front:
    """Non-dominated subset of all feasible points across ``fronts``, labels kept."""
    pts, labels = [], []
    for f in fronts:
        for p, ok, lab in zip(f.points, f.feasible, f.labels):
            if ok:
                pts.append(p)
                labels.append(lab)
    if not pts:
        return Front(np.empty((0, 3)), np.zeros(0, dtype=bool), ())
    merged = Front(np.array(pts), np.ones(len(pts), dtype=bool), tuple(labels)).dedup()
    return merged.subset(np.flatnonzero(nondominated_mask(merged.points)))
