"""Seeded replication studies over solvers, with CSV/JSON outputs."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .acquisition import AcquisitionConfig
from .config import ExperimentConfig
from .dps import DpsResult, build_dps, spline_fit
from .gp import GpConfig
from .metrics import format_value, gof
from .simulators import Simulator, TimeSeries, evaluate, load_external_target, make_target
from .solvers import BudgetPlan, hm_solve, msce_solve, rng_stream, scalarization_solve

__all__ = ["RESULT_COLUMNS", "resolve_target", "resolve_dps", "run_experiment", "write_dps_report"]

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ["simulator", "solver", "replication", "seed", "n0", "N", "k", "rmse", "r2",
                  "normd", "spread", "sim_calls", "wall_ms", "status"]


def resolve_target(cfg: ExperimentConfig) -> tuple[TimeSeries, dict]:
    if cfg.target_file is not None:
        series = load_external_target(cfg.target_file)
        if cfg.spec.name != "external" and series.grid.length != cfg.spec.grid.length:
            raise ValueError(f"target has {series.grid.length} points, simulator grid has "
                             f"{cfg.spec.grid.length}")
        return series, {"file": str(cfg.target_file)}
    return make_target(cfg.spec, cfg.x0, cfg.target_seed)


def resolve_dps(cfg: ExperimentConfig, target: TimeSeries) -> DpsResult:
    """Explicit knots (with their prefix MSE curve) or an automatic search."""
    if cfg.knots is None:
        return build_dps(target, cfg.kmax)
    curve = [spline_fit(target, cfg.knots[:k]).mse for k in range(len(cfg.knots) + 1)]
    return DpsResult(list(cfg.knots), curve, len(cfg.knots), "explicit", len(cfg.knots))


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isinf(v):
            return format_value(v)
        return repr(v)
    return str(v)


def write_dps_report(cfg: ExperimentConfig, out: Path, target=None) -> DpsResult:
    target = target if target is not None else resolve_target(cfg)[0]
    result = resolve_dps(cfg, target)
    _atomic_write(out / "dps_report.json", json.dumps(result.to_dict(), indent=2) + "\n")
    rows = [[k, repr(float(m))] for k, m in enumerate(result.mse_curve)]
    _atomic_write(out / "mse_curve.csv", _csv_text(["k", "mse"], rows))
    return result


def _run_one(cfg: ExperimentConfig, solver, rep: int, target: np.ndarray, dps: list,
             timing: bool):
    seed = cfg.base_seed + rep
    spec = cfg.spec
    sim = Simulator(spec, rng_stream(seed, "sim-noise") if spec.noise_sd > 0 else None)
    gp_config = GpConfig(n_starts=cfg.gp_starts)
    d = spec.input_dim
    n_extract = cfg.n_extract or 10_000 * d
    start = time.perf_counter()
    if solver.name == "msce":
        result = msce_solve(sim, target, dps, BudgetPlan(solver.n0, solver.N),
                            AcquisitionConfig(solver.alpha), solver.delta, cfg.n_candidates,
                            n_extract, seed, gp_config, design_effort=cfg.design_effort,
                            delta_max=cfg.delta_max)
        n0, k = solver.n0, len(dps)
    elif solver.name == "scalarization":
        result = scalarization_solve(sim, target, BudgetPlan(solver.n0, solver.N),
                                     AcquisitionConfig(solver.alpha, "global-min"),
                                     cfg.n_candidates, n_extract, seed, gp_config,
                                     design_effort=cfg.design_effort)
        n0, k = solver.n0, 0
    else:
        n0 = solver.n0 or 10 * d
        clusters = solver.clusters
        if clusters is None:
            clusters = max(1, math.ceil((solver.N - n0) / solver.waves)) if solver.N else 10
        result = hm_solve(sim, target, dps, n0, solver.waves, solver.cutoff, clusters,
                          solver.n_test, AcquisitionConfig(solver.alpha, "implausibility",
                                                           solver.cutoff),
                          solver.delta, n_extract, seed, gp_config,
                          design_effort=cfg.design_effort, delta_max=cfg.delta_max)
        k = len(dps)
    wall_ms = int(round(1000 * (time.perf_counter() - start)))
    if sim.n_calls != result.n_sim_calls:
        raise RuntimeError(f"audit mismatch: {sim.n_calls} calls, {result.n_sim_calls} logged")
    fitted = evaluate(replace(spec, noise_sd=0.0), spec.from_unit(result.x_opt)).values
    report = gof(fitted, target, result.spread, wall_ms / 1000, result.n_sim_calls)
    row = [spec.name, solver.name, rep, seed, n0, result.n_sim_calls if solver.name == "hm"
           else solver.N, k, report.rmse, report.r_squared, report.norm_d, result.spread,
           result.n_sim_calls, wall_ms if timing else None, "ok"]
    artifact = {
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "config": cfg.raw,
        "simulator": spec.name,
        "solver": solver.name,
        "replication": rep,
        "seed": seed,
        "rng": "numpy PCG64; streams = SeedSequence(seed, spawn_key=(crc32(name),))",
        "x_opt_unit": result.x_opt.tolist(),
        "x_opt": spec.from_unit(result.x_opt).tolist(),
        "gof": report.to_dict(),
        **{k_: v for k_, v in result.to_dict().items() if k_ not in ("x_opt",)},
    }
    series = [[repr(float(t)), repr(float(a)), repr(float(b))]
              for t, a, b in zip(spec.grid.t_values, target, fitted)]
    return row, artifact, series


def _task(args):
    cfg, solver, rep, target, dps, timing = args
    try:
        return rep, solver.name, _run_one(cfg, solver, rep, target, dps, timing), None
    except Exception as exc:  # one failed replication must not stop the study
        logger.exception("replication %d, solver %s failed", rep, solver.name)
        return rep, solver.name, None, f"{type(exc).__name__}: {exc}"


def run_experiment(cfg: ExperimentConfig, out: Path | None = None, jobs: int | None = None,
                   timing: bool = True) -> dict:
    """Run every (replication, solver) pair; returns a summary with the row counts."""
    if cfg.spec.name == "external":
        raise ValueError("the 'external' simulator cannot be run in-process; "
                         "use the 'dps' command or name a simulator")
    out = Path(out or cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    target, _ = resolve_target(cfg)
    dps_result = write_dps_report(cfg, out / "plots", target)
    dps = dps_result.dps
    jobs = jobs or cfg.jobs
    tasks = [(cfg, solver, rep, target.values, dps, timing)
             for rep in range(cfg.replications) for solver in cfg.solvers]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_task, tasks))
    else:
        outcomes = [_task(t) for t in tasks]

    order = {s.name: i for i, s in enumerate(cfg.solvers)}
    outcomes.sort(key=lambda o: (o[0], order[o[1]]))
    rows, failures = [], []
    for rep, sname, payload, error in outcomes:
        stem = f"{cfg.spec.name}_{sname}_r{rep:03d}"
        if payload is None:
            failures.append([cfg.spec.name, sname, rep, cfg.base_seed + rep] + [""] * 9
                            + [f"failed: {error}"])
            continue
        row, artifact, series = payload
        rows.append(row)
        _atomic_write(out / "runs" / f"{stem}.json", json.dumps(artifact, indent=1) + "\n")
        _atomic_write(out / "plots" / f"{stem}_series.csv",
                      _csv_text(["t", "target", "fitted"], series))
    _atomic_write(out / "results.csv",
                  _csv_text(RESULT_COLUMNS, [[_fmt(v) for v in r] for r in rows]))
    if failures:
        _atomic_write(out / "failures.csv",
                      _csv_text(RESULT_COLUMNS, [[_fmt(v) for v in r] for r in failures]))
    return {"rows": len(rows), "failures": len(failures), "dps": dps, "out": str(out)}
