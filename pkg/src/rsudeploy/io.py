"""CSV and JSON artifacts: fronts, telemetry, deployments, metrics."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .metrics import Front

FRONT_FIELDS = ("f1_s", "f2_s", "f3", "viol_obstacle_m", "viol_spacing_m", "phi", "algorithm", "seed")
REQUIRED_FRONT_FIELDS = ("f1_s", "f2_s", "f3", "phi", "algorithm", "seed")
METRICS_FIELDS = ("algorithm", "nps", "nfs", "igd", "hv", "s_metric")
COMPARE_FIELDS = ("strategy", "total_delay_s", "load_balance", "wall_time_s", "sweeps")


class ArtifactError(ValueError):
    """A malformed input artifact (front CSV, deployment file)."""


def fmt(value) -> str:
    """Shortest round-trip text for floats, plain text otherwise."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if value.is_integer() and abs(value) < 1e15:
            return str(int(value))
        return repr(value)
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_csv(path, fields, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for row in rows:
            w.writerow([fmt(row[k]) for k in fields])


def front_rows(members, algorithm: str, seed: int) -> list[dict]:
    rows = [{
        "f1_s": m.objectives.f1_total_delay_s,
        "f2_s": m.objectives.f2_max_sensitive_delay_s,
        "f3": m.objectives.f3_rsu_count,
        "viol_obstacle_m": m.violation.obstacle_violation_m,
        "viol_spacing_m": m.violation.spacing_violation_m,
        "phi": m.violation.phi,
        "algorithm": algorithm,
        "seed": seed,
        "cells": np.flatnonzero(m.genome).tolist(),
    } for m in members]
    rows.sort(key=lambda r: (r["f3"], r["f1_s"], r["f2_s"], r["phi"], r["cells"]))
    return rows


def write_deployments(path, rows: list[dict], algorithm: str, seed: int) -> None:
    data = {
        "algorithm": algorithm,
        "seed": seed,
        "solutions": [{"row": i, "cells": r["cells"], "f1_s": r["f1_s"], "f2_s": r["f2_s"],
                       "f3": r["f3"], "phi": r["phi"]} for i, r in enumerate(rows)],
    }
    Path(path).write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")


def _number(text: str, path, line: int, key: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ArtifactError(f"{path}:{line}: column {key} is not a number: {text!r}") from None
    if not math.isfinite(value):
        raise ArtifactError(f"{path}:{line}: column {key} is not finite")
    return value


def read_front_csv(path) -> list[dict]:
    """Rows of a front CSV as dicts with float objectives and violation."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ArtifactError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        missing = [k for k in REQUIRED_FRONT_FIELDS if k not in (reader.fieldnames or [])]
        if missing:
            raise ArtifactError(f"{path}: missing column(s) {', '.join(missing)}")
        rows = []
        for line, rec in enumerate(reader, start=2):
            row = {k: _number(rec[k], path, line, k) for k in ("f1_s", "f2_s", "f3", "phi")}
            if row["phi"] < 0:
                raise ArtifactError(f"{path}:{line}: phi must be >= 0")
            row["algorithm"] = rec["algorithm"] or ""
            row["seed"] = rec["seed"] or ""
            rows.append(row)
    return rows


def rows_to_front(rows: list[dict]) -> Front:
    pts = np.array([[r["f1_s"], r["f2_s"], r["f3"]] for r in rows]).reshape(-1, 3)
    feas = np.array([r["phi"] == 0 for r in rows], dtype=bool)
    labels = tuple((r["algorithm"], r["seed"]) for r in rows)
    return Front(pts, feas, labels)


def read_deployment(path, num_cells: int) -> list[int]:
    """Cell indices from a JSON list, a JSON object with ``cells``, or whitespace/comma separated text."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ArtifactError(f"cannot read deployment {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = [tok for tok in text.replace(",", " ").split()]
    if isinstance(data, dict):
        data = data.get("cells")
    if not isinstance(data, list):
        raise ArtifactError(f"deployment {path} must list cell indices")
    cells = []
    for tok in data:
        try:
            val = int(tok)
        except (TypeError, ValueError):
            raise ArtifactError(f"deployment {path}: {tok!r} is not a cell index") from None
        if isinstance(tok, float) and not float(tok).is_integer():
            raise ArtifactError(f"deployment {path}: {tok!r} is not a cell index")
        if not 0 <= val < num_cells:
            raise ArtifactError(f"deployment {path}: cell {val} outside [0, {num_cells})")
        cells.append(val)
    if len(set(cells)) != len(cells):
        raise ArtifactError(f"deployment {path}: repeated cell index")
    return sorted(cells)
