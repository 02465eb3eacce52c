"""Inverse solvers for time-series valued simulators.

Three solvers share one training-data bookkeeping scheme: every simulator call
returns the full series, which is cached so that any later surrogate (at any
time index) can reuse it.

* :func:`msce_solve` - contour estimation at each discretization point in
  turn, then intersection of the estimated scalar inverse sets.
* :func:`scalarization_solve` - global minimization of
  ``w(x) = ||g(x) - g0||`` with a scalar GP.
* :func:`hm_solve` - history matching with implausibility pruning and
  cluster-centre subsampling.

Inputs are on the unit cube throughout.
"""
from __future__ import annotations

import logging
import math
import zlib
from dataclasses import dataclass, field

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.cluster.vq import kmeans2

from . import gp
from .acquisition import (AcquisitionConfig, argmax_on_candidates, contour_ei,
                          global_min_ei, implausibility)
from .design import lhd, random_lhd

__all__ = [
    "BudgetPlan",
    "Extraction",
    "InverseResult",
    "msce_solve",
    "scalarization_solve",
    "hm_solve",
    "extract_solution",
    "spread",
    "rng_stream",
]

logger = logging.getLogger(__name__)

DELTA_MAX = 1e-2


def rng_stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for one named randomness stream of a replication."""
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(key,)))


@dataclass(frozen=True)
class BudgetPlan:
    """Initial design size ``n0``, total runs ``N`` and the split over ``k`` sub-problems."""

    n0: int
    N: int
    k: int = 1

    def __post_init__(self):
        if not 1 <= self.n0 < self.N:
            raise ValueError(f"need 1 <= n0 < N, got n0={self.n0}, N={self.N}")
        if self.k < 1:
            raise ValueError("k must be at least 1")

    @property
    def follow_ups(self) -> list:
        base, extra = divmod(self.N - self.n0, self.k)
        return [base + (1 if j < extra else 0) for j in range(self.k)]


def spread(points) -> float | None:
    """Sum of per-coordinate population variances; None for an empty set."""
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        return None
    points = np.atleast_2d(points)
    return float(np.sum(np.var(points, axis=0)))


def _count_clusters(points, gap=0.05) -> int:
    if len(points) == 0:
        return 0
    if len(points) == 1:
        return 1
    if len(points) > 3000:
        idx = np.linspace(0, len(points) - 1, 3000).astype(int)
        points = points[idx]
    labels = fcluster(linkage(points, "single"), t=gap, criterion="distance")
    return int(labels.max())


@dataclass
class Extraction:
    x_opt: np.ndarray
    s_members: np.ndarray
    u_members: np.ndarray
    delta_used: float | None
    fallback: str
    discrepancy: float
    log: list = field(default_factory=list)


@dataclass
class InverseResult:
    method: str
    x_opt: np.ndarray
    s_members: np.ndarray
    u_members: np.ndarray
    spread: float | None
    trail: list
    X: np.ndarray
    Y: np.ndarray
    dps: list = field(default_factory=list)
    delta_used: float | None = None
    fallback: str = "none"
    n_clusters: int = 0
    notes: list = field(default_factory=list)

    @property
    def n_sim_calls(self) -> int:
        return len(self.trail)

    @property
    def best_discrepancy(self) -> float:
        return self.trail[-1]["best_discrepancy"] if self.trail else math.nan

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "x_opt": self.x_opt.tolist(),
            "dps": [int(j) for j in self.dps],
            "delta_used": self.delta_used,
            "fallback": self.fallback,
            "n_s_members": int(len(self.s_members)),
            "n_u_members": int(len(self.u_members)),
            "n_clusters": self.n_clusters,
            "spread": self.spread,
            "sim_calls": self.n_sim_calls,
            "trail": self.trail,
            "notes": self.notes,
        }


class _Runs:
    """Training inputs and full output series, with an audit trail."""

    def __init__(self, simulator, g0, dim):
        self.simulator = simulator
        self.g0 = np.asarray(g0, dtype=float)
        self.dim = dim
        self.X = np.empty((0, dim))
        self.Y = np.empty((0, self.g0.size))
        self.trail = []
        self._best = math.inf

    def add(self, x, phase, criterion=None):
        x = np.asarray(x, dtype=float).reshape(self.dim)
        y = np.asarray(self.simulator(x), dtype=float)
        if y.shape != self.g0.shape:
            raise ValueError(f"simulator returned shape {y.shape}, target has {self.g0.shape}")
        self.X = np.vstack([self.X, x])
        self.Y = np.vstack([self.Y, y])
        disc = float(np.linalg.norm(y - self.g0))
        self._best = min(self._best, disc)
        self.trail.append({
            "step": len(self.trail) + 1,
            "phase": phase,
            "x": x.tolist(),
            "criterion": None if criterion is None else float(criterion),
            "discrepancy": disc,
            "best_discrepancy": self._best,
        })
        return y

    @property
    def discrepancies(self) -> np.ndarray:
        return np.linalg.norm(self.Y - self.g0, axis=1)


def _dim(simulator, dim):
    if dim is not None:
        return int(dim)
    try:
        return int(simulator.dim)
    except AttributeError:
        raise ValueError("pass dim= for simulators without a .dim attribute") from None


def _initial_design(runs, n0, rng, effort):
    design = lhd(n0, runs.dim, rng, "maxpro", effort)
    for x in design.points:
        runs.add(x, "initial")


def _as_index(dps, length):
    idx = [int(j) - 1 for j in dps]
    if not idx or any(i < 0 or i >= length for i in idx):
        raise ValueError(f"DPS indices must lie in 1..{length}: {list(dps)}")
    return idx


def _extraction_set(dim, n_extract, rng, X):
    pts = random_lhd(n_extract, dim, rng)
    return np.vstack([pts, X]), np.arange(n_extract, n_extract + X.shape[0])


def extract_solution(models, points, targets, delta, alpha=0.67, train_idx=(),
                     train_values=None, delta_max=DELTA_MAX, refine_rng=None) -> Extraction:
    """Inverse-solution sets and point estimate from the final DPS surrogates.

    ``points`` is the extraction set; ``targets`` the target values at the
    DPS.  Rows listed in ``train_idx`` are training inputs whose true DPS
    values are given in ``train_values`` (same order); their discrepancy uses
    those values instead of the surrogate predictions.

    Discrepancy of a point is the Euclidean norm of its DPS-level gaps.  The
    estimate is the arg-min of that discrepancy over the intersection of the
    ``delta`` sets; an empty intersection raises ``delta`` tenfold up to
    ``delta_max``, then falls back to the intersection of the uncertainty
    sets, then to the best training point.  With ``refine_rng`` the estimate
    is polished on a denser local set (see ``_refine``); the reported sets
    still come from ``points`` alone.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    targets = np.asarray(targets, dtype=float)
    if points.shape[0] == 0:
        raise ValueError("extraction set is empty")
    means = np.empty((points.shape[0], len(models)))
    sds = np.empty_like(means)
    for j, model in enumerate(models):
        pred = gp.predict(model, points)
        means[:, j], sds[:, j] = pred.mean, pred.sd
    gap = np.abs(means - targets)
    u_mask = np.all(gap < alpha * sds, axis=1)

    values = means.copy()
    train_idx = np.asarray(train_idx, dtype=int)
    if train_idx.size:
        values[train_idx] = np.asarray(train_values, dtype=float)
    disc = np.linalg.norm(values - targets, axis=1)

    log = []
    d = float(delta)
    s_mask = np.all(gap < d, axis=1)
    while not s_mask.any() and d * 10 <= delta_max * (1 + 1e-12):
        log.append(f"empty S-intersection at delta={d:g}")
        d *= 10
        s_mask = np.all(gap < d, axis=1)

    fallback = "none"
    if s_mask.any():
        pool, delta_used = np.flatnonzero(s_mask), d
    elif u_mask.any():
        log.append(f"empty S-intersection up to delta={d:g}; using U-intersection")
        pool, delta_used, fallback = np.flatnonzero(u_mask), None, "u-intersection"
    elif train_idx.size:
        log.append("empty U-intersection; using best training point")
        pool, delta_used, fallback = train_idx, None, "best-training-point"
    else:
        log.append("empty U-intersection; using full extraction set")
        pool, delta_used, fallback = np.arange(points.shape[0]), None, "extraction-set"
    best = pool[int(np.argmin(disc[pool]))]
    x_opt, best_disc = points[best].copy(), float(disc[best])
    if refine_rng is not None and fallback in ("none", "u-intersection"):
        x_opt, best_disc = _refine(models, x_opt, best_disc, targets, delta_used, alpha,
                                   points.shape[0], refine_rng)
    for line in log:
        logger.info(line)
    return Extraction(x_opt, points[s_mask], points[u_mask], delta_used, fallback, best_disc, log)


def _refine(models, x, disc, targets, delta, alpha, n_base, rng):
    """Search a local random LHD around ``x`` under the same membership rule.

    The half-width is two typical spacings of the base set, so the local set
    is about as many points as the base set but far denser; no simulator
    calls are made.
    """
    dim = x.size
    half = 2.0 * n_base ** (-1.0 / dim)
    lo, hi = np.clip(x - half, 0.0, 1.0), np.clip(x + half, 0.0, 1.0)
    local = lo + random_lhd(max(n_base // 4, 1), dim, rng) * (hi - lo)
    preds = [gp.predict(m, local) for m in models]
    means = np.column_stack([p.mean for p in preds])
    gap = np.abs(means - targets)
    if delta is not None:
        ok = np.all(gap < delta, axis=1)
    else:
        ok = np.all(gap < alpha * np.column_stack([p.sd for p in preds]), axis=1)
    local_disc = np.linalg.norm(means - targets, axis=1)
    local_disc[~ok] = np.inf
    i = int(np.argmin(local_disc))
    if local_disc[i] < disc:
        return local[i].copy(), float(local_disc[i])
    return x, disc


def _fit(X, y, gp_config):
    return gp.fit(X, y, gp_config)


def msce_solve(simulator, g0, dps, plan: BudgetPlan, acq: AcquisitionConfig | None = None,
               delta: float = 1e-5, n_candidates: int = 5000, n_extract: int | None = None,
               seed: int = 0, gp_config: gp.GpConfig | None = None, dim: int | None = None,
               design_effort: int = 2000, delta_max: float = DELTA_MAX) -> InverseResult:
    """Multiple scalar-valued contour estimation.

    ``dps`` holds 1-based time indices; the sub-problems are solved in the
    given order, each with its share of the ``N - n0`` follow-up runs.
    """
    acq = acq or AcquisitionConfig()
    dim = _dim(simulator, dim)
    g0 = np.asarray(g0, dtype=float)
    idx = _as_index(dps, g0.size)
    plan = BudgetPlan(plan.n0, plan.N, len(idx))
    runs = _Runs(simulator, g0, dim)
    _initial_design(runs, plan.n0, rng_stream(seed, "design"), design_effort)
    cand_rng = rng_stream(seed, "candidates")

    for j, (col, n_follow) in enumerate(zip(idx, plan.follow_ups), start=1):
        level = g0[col]
        for _ in range(n_follow):
            model = _fit(runs.X, runs.Y[:, col], gp_config)
            cands = random_lhd(n_candidates, dim, cand_rng)

            def criterion(c, model=model, level=level):
                pred = gp.predict(model, c)
                return contour_ei(pred.mean, pred.sd, level, acq.alpha)

            x_new, value, _ = argmax_on_candidates(criterion, cands, runs.X)
            runs.add(x_new, f"contour-{j}", value)

    models = [_fit(runs.X, runs.Y[:, col], gp_config) for col in idx]
    n_extract = n_extract or 10_000 * dim
    points, train_idx = _extraction_set(dim, n_extract, rng_stream(seed, "extraction"), runs.X)
    ext = extract_solution(models, points, g0[idx], delta, acq.alpha, train_idx,
                           runs.Y[:, idx], delta_max, rng_stream(seed, "refine"))
    return InverseResult("msce", ext.x_opt, ext.s_members, ext.u_members, spread(ext.u_members),
                         runs.trail, runs.X, runs.Y, list(dps), ext.delta_used, ext.fallback,
                         _count_clusters(ext.s_members), ext.log)


def scalarization_solve(simulator, g0, plan: BudgetPlan, acq: AcquisitionConfig | None = None,
                        n_candidates: int = 5000, n_extract: int | None = None, seed: int = 0,
                        gp_config: gp.GpConfig | None = None, dim: int | None = None,
                        design_effort: int = 2000) -> InverseResult:
    """Global minimization of ``||g(x) - g0||`` with expected improvement.

    The reported uncertainty set is ``{x : w_hat(x) < w_min + alpha * s(x)}``
    on the extraction set.
    """
    acq = acq or AcquisitionConfig(criterion="global-min")
    dim = _dim(simulator, dim)
    g0 = np.asarray(g0, dtype=float)
    runs = _Runs(simulator, g0, dim)
    _initial_design(runs, plan.n0, rng_stream(seed, "design"), design_effort)
    cand_rng = rng_stream(seed, "candidates")

    for _ in range(plan.N - plan.n0):
        w = runs.discrepancies
        model = _fit(runs.X, w, gp_config)
        cands = random_lhd(n_candidates, dim, cand_rng)

        def criterion(c, model=model, best=float(w.min())):
            pred = gp.predict(model, c)
            return global_min_ei(pred.mean, pred.sd, best)

        x_new, value, _ = argmax_on_candidates(criterion, cands, runs.X)
        runs.add(x_new, "global-min", value)

    w = runs.discrepancies
    best = int(np.argmin(w))
    model = _fit(runs.X, w, gp_config)
    n_extract = n_extract or 10_000 * dim
    points = random_lhd(n_extract, dim, rng_stream(seed, "extraction"))
    pred = gp.predict(model, points)
    u_members = points[pred.mean < w[best] + acq.alpha * pred.sd]
    return InverseResult("scalarization", runs.X[best].copy(), np.empty((0, dim)), u_members,
                         spread(u_members), runs.trail, runs.X, runs.Y, [], None,
                         "training-argmin", 0)


def hm_solve(simulator, g0, dps, n0: int | None = None, waves: int = 3, cutoff: float = 3.0,
             clusters: int = 10, n_test: int = 5000, acq: AcquisitionConfig | None = None,
             delta: float = 1e-5, n_extract: int | None = None, seed: int = 0,
             gp_config: gp.GpConfig | None = None, dim: int | None = None,
             design_effort: int = 2000, delta_max: float = DELTA_MAX) -> InverseResult:
    """History matching with k-means subsampling of the plausible region.

    Each wave refits the DPS surrogates, keeps test points whose maximum
    implausibility is at most ``cutoff``, clusters them and runs the
    simulator at the plausible points nearest the cluster centres.
    """
    if waves < 1:
        raise ValueError("waves must be at least 1")
    acq = acq or AcquisitionConfig(criterion="implausibility", cutoff=cutoff)
    dim = _dim(simulator, dim)
    g0 = np.asarray(g0, dtype=float)
    idx = _as_index(dps, g0.size)
    n0 = n0 or 10 * dim
    runs = _Runs(simulator, g0, dim)
    _initial_design(runs, n0, rng_stream(seed, "design"), design_effort)
    test_rng = rng_stream(seed, "candidates")
    km_rng = rng_stream(seed, "kmeans")
    notes = []

    for wave in range(1, waves + 1):
        models = [_fit(runs.X, runs.Y[:, col], gp_config) for col in idx]
        test = random_lhd(n_test, dim, test_rng)
        preds = [gp.predict(m, test) for m in models]
        means = np.column_stack([p.mean for p in preds])
        sds = np.column_stack([p.sd for p in preds])
        im = implausibility(means, sds, g0[idx])
        c = cutoff
        plausible = np.flatnonzero(im <= c)
        if plausible.size == 0:
            c = cutoff * 1.5
            plausible = np.flatnonzero(im <= c)
            notes.append(f"wave {wave}: no plausible points, cutoff relaxed to {c:g}")
        if plausible.size == 0:
            notes.append(f"wave {wave}: still no plausible points; stopping early")
            logger.warning(notes[-1])
            break
        pts = test[plausible]
        m = min(clusters, pts.shape[0])
        if m == pts.shape[0]:
            chosen = np.arange(m)
        else:
            centres, _ = kmeans2(pts, m, minit="++", seed=km_rng)
            dist = np.linalg.norm(pts[:, None, :] - centres[None, :, :], axis=2)
            chosen = np.unique(np.argmin(dist, axis=0))
        for i in chosen:
            x = pts[i]
            if np.min(np.max(np.abs(runs.X - x), axis=1)) <= 1e-9:
                continue
            runs.add(x, f"wave-{wave}", im[plausible[i]])

    models = [_fit(runs.X, runs.Y[:, col], gp_config) for col in idx]
    n_extract = n_extract or 10_000 * dim
    points, train_idx = _extraction_set(dim, n_extract, rng_stream(seed, "extraction"), runs.X)
    ext = extract_solution(models, points, g0[idx], delta, acq.alpha, train_idx,
                           runs.Y[:, idx], delta_max, rng_stream(seed, "refine"))
    return InverseResult("hm", ext.x_opt, ext.s_members, ext.u_members, spread(ext.u_members),
                         runs.trail, runs.X, runs.Y, list(dps), ext.delta_used, ext.fallback,
                         _count_clusters(ext.s_members), notes + ext.log)
