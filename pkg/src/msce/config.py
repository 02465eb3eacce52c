"""Experiment configuration: a TOML file with a validated schema.

Example::

    [simulator]
    name = "easom"            # easom | levy | harari | bliznyuk | external
    noise_sd = 0.0

    [target]
    x0 = [0.8, 0.2]           # native scale; or: file = "target.csv"

    [dps]
    knots = [145, 37, 132]    # or: kmax = 10 for automatic selection

    [experiment]
    replications = 20
    base_seed = 1
    out = "results"

    [solvers.msce]
    n0 = 15
    N = 50

    [solvers.scalarization]
    n0 = 15
    N = 50

    [solvers.hm]
    waves = 3
"""
from __future__ import annotations

import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .simulators import SIMULATORS, SimulatorSpec, TimeGrid, get_spec

__all__ = ["ConfigError", "ExperimentConfig", "SolverConfig", "load_config", "SEED_ENV"]

SEED_ENV = "INVERSE_TS_SEED"
SOLVERS = ("msce", "scalarization", "hm")

_SCHEMA = {
    "simulator": {"name": str, "noise_sd": float, "box": list, "grid": dict},
    "target": {"x0": list, "file": str, "seed": int},
    "dps": {"knots": list, "kmax": int},
    "experiment": {"replications": int, "base_seed": int, "out": str, "jobs": int},
    "settings": {"n_candidates": int, "n_extract": int, "design_effort": int,
                 "gp_starts": int, "delta_max": float},
}
_SOLVER_KEYS = {
    "msce": {"n0": int, "N": int, "alpha": float, "delta": float},
    "scalarization": {"n0": int, "N": int, "alpha": float},
    "hm": {"n0": int, "N": int, "waves": int, "cutoff": float, "clusters": int, "n_test": int,
           "alpha": float, "delta": float},
}


class ConfigError(ValueError):
    """Schema violation; ``str()`` carries ``path:line: message`` diagnostics."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))


@dataclass
class SolverConfig:
    name: str
    n0: int | None = None
    N: int | None = None
    alpha: float = 0.67
    delta: float = 1e-5
    waves: int = 3
    cutoff: float = 3.0
    clusters: int | None = None
    n_test: int = 5000


@dataclass
class ExperimentConfig:
    path: Path
    spec: SimulatorSpec
    x0: list | None
    target_file: Path | None
    target_seed: int
    knots: list | None
    kmax: int
    solvers: list
    replications: int = 1
    base_seed: int = 0
    out: Path = Path("results")
    jobs: int = 1
    n_candidates: int = 5000
    n_extract: int | None = None
    design_effort: int = 2000
    gp_starts: int = 5
    delta_max: float = 1e-2
    raw: dict = field(default_factory=dict, repr=False)


def _key_lines(text):
    """Map dotted key paths to the line that sets them."""
    lines = {}
    section = ""
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        head = re.match(r"^\[([^\]]+)\]$", stripped)
        if head:
            section = head.group(1).strip()
            lines.setdefault(section, lineno)
            continue
        kv = re.match(r"^([A-Za-z0-9_\-]+)\s*=", stripped)
        if kv:
            lines.setdefault(f"{section}.{kv.group(1)}" if section else kv.group(1), lineno)
    return lines


def _check_type(value, kind):
    if kind is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind is int:
        return isinstance(value, int) and not isinstance(value, bool)
    return isinstance(value, kind)


def load_config(path, out: str | os.PathLike | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"{path}: cannot read config ({exc.strerror})"]) from None
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"{path}: {exc}"]) from None

    lines = _key_lines(text)
    problems = []

    def err(key, msg):
        where = lines.get(key) or lines.get(key.rsplit(".", 1)[0])
        problems.append(f"{path}:{where or '?'}: {key}: {msg}")

    for section, value in raw.items():
        if section == "solvers":
            if not isinstance(value, dict) or not value:
                err("solvers", "expected at least one [solvers.<name>] table")
                continue
            for name, opts in value.items():
                if name not in _SOLVER_KEYS:
                    err(f"solvers.{name}", f"unknown solver (choose from {', '.join(SOLVERS)})")
                    continue
                if not isinstance(opts, dict):
                    err(f"solvers.{name}", "expected a table")
                    continue
                for key, v in opts.items():
                    kind = _SOLVER_KEYS[name].get(key)
                    if kind is None:
                        err(f"solvers.{name}.{key}", "unknown key")
                    elif not _check_type(v, kind):
                        err(f"solvers.{name}.{key}", f"expected {kind.__name__}")
            continue
        if section not in _SCHEMA:
            err(section, "unknown section")
            continue
        if not isinstance(value, dict):
            err(section, "expected a table")
            continue
        for key, v in value.items():
            kind = _SCHEMA[section].get(key)
            if kind is None:
                err(f"{section}.{key}", "unknown key")
            elif not _check_type(v, kind):
                err(f"{section}.{key}", f"expected {kind.__name__}")
    if problems:
        raise ConfigError(problems)

    sim = raw.get("simulator", {})
    name = sim.get("name")
    if name is None:
        err("simulator", "missing 'name'")
        raise ConfigError(problems)
    if name != "external" and name not in SIMULATORS:
        err("simulator.name", f"unknown simulator {name!r}")
        raise ConfigError(problems)

    target = raw.get("target", {})
    target_file = target.get("file")
    if target_file is not None:
        target_file = (path.parent / target_file).resolve()
    x0 = target.get("x0")
    if (x0 is None) == (target_file is None):
        err("target", "give exactly one of 'x0' or 'file'")
    if name == "external" and target_file is None:
        err("target.file", "the external simulator needs a target file")

    spec = None
    try:
        if name == "external":
            grid = TimeGrid(2)
            box = sim.get("box") or [[0.0, 1.0]]
            spec = SimulatorSpec("external", tuple(tuple(b) for b in box), grid,
                                 float(sim.get("noise_sd", 0.0)))
        else:
            base = get_spec(name, float(sim.get("noise_sd", 0.0)))
            grid = base.grid
            if "grid" in sim:
                g = sim["grid"]
                grid = TimeGrid(int(g.get("length", grid.length)), float(g.get("start", grid.start)),
                                float(g.get("stop", grid.stop)))
            box = tuple(tuple(float(v) for v in b) for b in sim["box"]) if "box" in sim \
                else base.input_box
            spec = SimulatorSpec(name, box, grid, base.noise_sd)
    except (ValueError, TypeError) as exc:
        err("simulator", str(exc))

    if spec is not None and x0 is not None:
        if len(x0) != spec.input_dim:
            err("target.x0", f"expected {spec.input_dim} values, got {len(x0)}")
        elif any(not (lo <= v <= hi) for v, (lo, hi) in zip(x0, spec.input_box)):
            err("target.x0", f"outside input box {spec.input_box}")

    dps = raw.get("dps", {})
    knots = dps.get("knots")
    length = spec.grid.length if spec is not None and name != "external" else None
    if knots is not None:
        if not knots or any(not _check_type(k, int) for k in knots):
            err("dps.knots", "expected a non-empty list of integers")
        elif len(set(knots)) != len(knots):
            err("dps.knots", "indices must be distinct")
        elif length is not None and any(not 1 <= k <= length for k in knots):
            err("dps.knots", f"indices must lie in 1..{length}")
    kmax = int(dps.get("kmax", 10))
    if kmax < 3:
        err("dps.kmax", "must be at least 3")

    exp = raw.get("experiment", {})
    reps = int(exp.get("replications", 1))
    if reps < 1:
        err("experiment.replications", "must be at least 1")
    base_seed = int(exp.get("base_seed", 0))
    if os.environ.get(SEED_ENV):
        try:
            base_seed = int(os.environ[SEED_ENV])
        except ValueError:
            problems.append(f"{SEED_ENV}={os.environ[SEED_ENV]!r}: expected an integer")

    solvers = []
    for sname, opts in raw.get("solvers", {}).items():
        sc = SolverConfig(sname, **opts)
        if sname in ("msce", "scalarization"):
            if sc.n0 is None or sc.N is None:
                err(f"solvers.{sname}", "n0 and N are required")
            elif not 1 <= sc.n0 < sc.N:
                err(f"solvers.{sname}", "need 1 <= n0 < N")
        if sname == "hm" and sc.waves < 1:
            err("solvers.hm.waves", "must be at least 1")
        if sc.alpha <= 0 or sc.delta <= 0 or sc.cutoff <= 0:
            err(f"solvers.{sname}", "alpha, delta and cutoff must be positive")
        solvers.append(sc)
    if not solvers:
        err("solvers", "no solvers configured")

    settings = raw.get("settings", {})
    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(
        path=path,
        spec=spec,
        x0=x0,
        target_file=target_file,
        target_seed=int(target.get("seed", 0)),
        knots=knots,
        kmax=kmax,
        solvers=solvers,
        replications=reps,
        base_seed=base_seed,
        out=Path(out) if out is not None else (path.parent / exp.get("out", "results")),
        jobs=int(exp.get("jobs", 1)),
        n_candidates=int(settings.get("n_candidates", 5000)),
        n_extract=settings.get("n_extract"),
        design_effort=int(settings.get("design_effort", 2000)),
        gp_starts=int(settings.get("gp_starts", 5)),
        delta_max=float(settings.get("delta_max", 1e-2)),
        raw=raw,
    )
