"""Command-line front end: optimize, compare-offloading, report-metrics, synth-scenario.

Exit codes: 0 success, 1 runtime failure, 2 configuration or input error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, dump_manifest, load_config
from .evolver import TELEMETRY_FIELDS, run
from .io import (COMPARE_FIELDS, FRONT_FIELDS, METRICS_FIELDS, ArtifactError, front_rows,
                 read_deployment, read_front_csv, rows_to_front, write_csv, write_deployments)
from .metrics import count_nps_nfs, hypervolume, igd, merge_pareto, nondominated_mask, normalize, spacing
from .objectives import make_deployment
from .offloading import IBRSG, OffloadConfig, assign, load_balance, total_assignment_delay
from .radio import LinkTable
from .scenario import ScenarioError, load_scenario, save_scenario, synth_scenario

log = logging.getLogger("rsudeploy")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


class _Artifacts:
    """Tracks files written by a command so a failure can remove them."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.written: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.out_dir / name
        self.written.append(p)
        return p

    def discard(self):
        for p in self.written:
            p.unlink(missing_ok=True)


def _resolve(args) -> RunConfig:
    overrides = list(args.set or [])
    if args.output:
        overrides.append(f"run.output_dir={args.output}")
    if args.seed:
        overrides.append(f"run.seeds=[{', '.join(str(s) for s in args.seed)}]")
    if getattr(args, "workers", None):
        overrides.append(f"run.workers={args.workers}")
    return load_config(args.config, overrides)


def _scenario(cfg: RunConfig):
    if not cfg.run.scenario_path:
        raise ConfigError("run.scenario_path is not set")
    path = Path(cfg.run.scenario_path)
    if not path.is_file():
        raise ConfigError(f"scenario file {path} does not exist")
    return load_scenario(path)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.run.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    return out


def cmd_optimize(args) -> int:
    cfg = _resolve(args)
    scenario = _scenario(cfg)
    out = _out_dir(cfg)
    arts = _Artifacts(out)
    try:
        dump_manifest(cfg, arts.path("run_manifest.json"), {"version": __version__})
        for seed in cfg.run.seeds:
            ecfg = dataclasses.replace(cfg.evolver, master_seed=int(seed))
            t0 = time.perf_counter()
            result = run(ecfg, scenario, cfg.radio, cfg.queue, cfg.offload, workers=cfg.run.workers)
            log.info("seed %d: %d feasible non-dominated solutions in %.1f s",
                     seed, len(result.solutions), time.perf_counter() - t0)
            rows = front_rows(result.front, ecfg.variant, int(seed))
            write_csv(arts.path(f"front_{seed}.csv"), FRONT_FIELDS, rows)
            write_csv(arts.path(f"telemetry_{seed}.csv"), TELEMETRY_FIELDS, result.telemetry)
            write_deployments(arts.path(f"deployments_{seed}.json"), rows, ecfg.variant, int(seed))
    except BaseException:
        arts.discard()
        raise
    return EXIT_OK


def cmd_compare_offloading(args) -> int:
    cfg = _resolve(args)
    scenario = _scenario(cfg)
    if not cfg.compare.deployment_path:
        raise ConfigError("compare.deployment_path is not set")
    cells = read_deployment(cfg.compare.deployment_path, scenario.num_cells)
    if not cells:
        raise ArtifactError("deployment holds no RSU")
    for name in cfg.compare.strategies:
        try:
            OffloadConfig(strategy=name)
        except ValueError as exc:
            raise ConfigError(f"compare.strategies: {exc}") from exc
    deployment = make_deployment(scenario, cells)
    out = _out_dir(cfg)
    arts = _Artifacts(out)
    try:
        links = LinkTable(scenario, cfg.radio)
        links.trans_matrix(np.array(cells))  # warm the link cache so timings compare strategies only
        rows = []
        for name in cfg.compare.strategies:
            ocfg = dataclasses.replace(cfg.offload, strategy=name)
            t0 = time.perf_counter()
            a = assign(scenario, deployment, cfg.radio, cfg.queue, ocfg, links=links)
            wall = time.perf_counter() - t0
            rows.append({
                "strategy": ocfg.strategy,
                "total_delay_s": total_assignment_delay(scenario, deployment, a, cfg.radio, cfg.queue, links),
                "load_balance": load_balance(a, len(cells), cells),
                "wall_time_s": wall,
                "sweeps": a.total_sweeps if ocfg.strategy == IBRSG else 0,
            })
        write_csv(arts.path("offload_compare.csv"), COMPARE_FIELDS, rows)
    except BaseException:
        arts.discard()
        raise
    return EXIT_OK


def front_metrics(rows: list[dict]) -> tuple[list[dict], list[dict]]:
    """Per-algorithm indicators and the merged feasible front of all rows.

    Each algorithm's rows (all seeds pooled) form its front. IGD uses the
    merged front as reference, normalized by its extremes; hypervolume and
    spacing use the feasible non-dominated points of each algorithm,
    normalized by the bounds of every feasible point in the batch.
    """
    algorithms = sorted({r["algorithm"] for r in rows})
    fronts = {a: rows_to_front([r for r in rows if r["algorithm"] == a]).dedup() for a in algorithms}
    merged = merge_pareto(list(fronts.values()))
    feas_all = np.vstack([f.points[f.feasible] for f in fronts.values()] + [np.empty((0, 3))])
    lo = feas_all.min(axis=0) if len(feas_all) else None
    hi = feas_all.max(axis=0) if len(feas_all) else None
    metrics = []
    for a in algorithms:
        front = fronts[a]
        nps, nfs = count_nps_nfs(front)
        feas = front.points[front.feasible]
        feas = feas[nondominated_mask(feas)] if len(feas) else feas
        rec = {"algorithm": a, "nps": nps, "nfs": nfs, "igd": math.inf, "hv": 0.0, "s_metric": math.nan}
        if len(feas) and len(merged):
            rec["igd"] = igd(feas, merged.points)
            rec["hv"] = hypervolume(normalize(feas, lo, hi))
            if len(feas) >= 2:
                rec["s_metric"] = spacing(normalize(feas, lo, hi))
        metrics.append(rec)
    order = np.lexsort((merged.points[:, 1], merged.points[:, 0], merged.points[:, 2])) if len(merged) else []
    merged_rows = [{"f1_s": merged.points[i, 0], "f2_s": merged.points[i, 1], "f3": merged.points[i, 2],
                    "phi": 0.0, "algorithm": merged.labels[i][0], "seed": merged.labels[i][1]} for i in order]
    return metrics, merged_rows


def cmd_report_metrics(args) -> int:
    if not args.fronts:
        raise ConfigError("report-metrics needs at least one front CSV")
    rows = []
    for path in args.fronts:
        rows.extend(read_front_csv(path))
    out = Path(args.output or ".")
    out.mkdir(parents=True, exist_ok=True)
    arts = _Artifacts(out)
    try:
        metrics, merged = front_metrics(rows)
        write_csv(arts.path("metrics.csv"), METRICS_FIELDS, metrics)
        write_csv(arts.path("merged_front.csv"), ("f1_s", "f2_s", "f3", "phi", "algorithm", "seed"), merged)
    except BaseException:
        arts.discard()
        raise
    return EXIT_OK


def cmd_synth_scenario(args) -> int:
    cfg = _resolve(args)
    out = _out_dir(cfg)
    arts = _Artifacts(out)
    try:
        for seed in cfg.run.seeds:
            save_scenario(synth_scenario(int(seed), cfg.synth), arts.path(f"scenario_{seed}.json"))
    except BaseException:
        arts.discard()
        raise
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML or JSON run configuration")
    common.add_argument("--set", action="append", metavar="K=V",
                        help="override a config value, e.g. evolver.calibrate=false (repeatable)")
    common.add_argument("--output", metavar="DIR", help="output directory (run.output_dir)")
    common.add_argument("--seed", action="append", type=int, metavar="N", help="run seed (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    p = argparse.ArgumentParser(prog="rsudeploy", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    opt = sub.add_parser("optimize", parents=[common], help="run the evolutionary deployment search")
    opt.add_argument("--workers", type=int, metavar="N", help="evaluation processes (run.workers)")
    opt.set_defaults(func=cmd_optimize)

    cmp_ = sub.add_parser("compare-offloading", parents=[common],
                          help="compare offloading strategies on a fixed deployment")
    cmp_.set_defaults(func=cmd_compare_offloading)

    rep = sub.add_parser("report-metrics", parents=[common], help="indicators and merged front of front CSVs")
    rep.add_argument("fronts", nargs="*", metavar="FRONT_CSV")
    rep.set_defaults(func=cmd_report_metrics)

    syn = sub.add_parser("synth-scenario", parents=[common],
                         help="write synthetic scenarios (one per --seed) as JSON")
    syn.set_defaults(func=cmd_synth_scenario)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ScenarioError, ArtifactError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - report any runtime failure as exit 1
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
