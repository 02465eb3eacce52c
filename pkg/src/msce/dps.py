"""Discretization-point sets from regression-spline knot selection.

A cubic regression spline is fitted to the target series by ordinary least
squares; the knot locations that best reconstruct the series become the time
points at which the inverse problem is reduced to scalar sub-problems.

Knot positions are 1-based grid indices.  A knot at index ``i`` sits at the
``i``-th grid time, so the spline space does not depend on how time is
labelled.
"""
from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.interpolate import BSpline

from .simulators import TimeSeries

__all__ = [
    "SplineFit",
    "DpsResult",
    "spline_basis",
    "spline_fit",
    "sequential_knot_search",
    "simultaneous_knot_search",
    "elbow",
    "search_cost",
    "build_dps",
]

logger = logging.getLogger(__name__)

DEGREE = 3


@dataclass
class SplineFit:
    knots: tuple
    coef: np.ndarray
    mse: float
    rank_deficient: bool = False
    fitted: np.ndarray | None = field(default=None, repr=False)


@dataclass
class DpsResult:
    """Knot order, MSE curve and the selected discretization points.

    ``mse_curve[k]`` is the training MSE with the first ``k`` knots
    (``mse_curve[0]`` is the plain cubic fit).
    """

    knots: list
    mse_curve: list
    k: int
    mode: str
    fit_count: int = 0
    wall_seconds: float = 0.0

    @property
    def dps(self) -> list:
        return list(self.knots[: self.k])

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "knot_order": [int(i) for i in self.knots],
            "mse_curve": [float(m) for m in self.mse_curve],
            "selected_k": int(self.k),
            "dps": [int(i) for i in self.dps],
            "fit_count": int(self.fit_count),
            "wall_seconds": float(self.wall_seconds),
        }


def spline_basis(t: np.ndarray, knot_times) -> np.ndarray:
    """Cubic B-spline design matrix with boundary knots at the ends of ``t``.

    The full basis sums to one at every ``t``, so its span already contains the
    intercept.
    """
    t = np.asarray(t, dtype=float)
    lo, hi = t[0], t[-1]
    inner = np.sort(np.asarray(knot_times, dtype=float))
    full = np.concatenate([[lo] * (DEGREE + 1), inner, [hi] * (DEGREE + 1)])
    # right endpoint belongs to the last non-empty interval
    tt = np.clip(t, lo, np.nextafter(hi, lo))
    basis = BSpline.design_matrix(tt, full, DEGREE, extrapolate=False).toarray()
    return basis


def _values(series) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(series, TimeSeries):
        return series.t, series.values
    y = np.asarray(series, dtype=float)
    return np.linspace(0.0, 1.0, y.size), y


def spline_fit(series, knots) -> SplineFit:
    """Least-squares cubic spline with interior knots at the given grid indices."""
    t, y = _values(series)
    knots = tuple(int(i) for i in knots)
    if len(set(knots)) != len(knots):
        raise ValueError(f"knot indices must be distinct: {knots}")
    if any(i < 1 or i > t.size for i in knots):
        raise ValueError(f"knot indices must lie in 1..{t.size}: {knots}")
    basis = spline_basis(t, t[np.asarray(knots, dtype=int) - 1] if knots else [])
    coef, _, rank, _ = linalg.lstsq(basis, y, lapack_driver="gelsy")
    fitted = basis @ coef
    resid = y - fitted
    mse = float(resid @ resid) / y.size
    return SplineFit(knots, coef, mse, rank < basis.shape[1], fitted)


class _FitCounter:
    def __init__(self, series):
        self.series = series
        self.count = 0

    def __call__(self, knots) -> float:
        self.count += 1
        return spline_fit(self.series, knots).mse


def _greedy(fit, n_points: int, kmax: int, start=()) -> tuple[list, list]:
    chosen = list(start)
    curve = []
    for _ in range(kmax - len(chosen)):
        best_i, best_mse = None, math.inf
        for i in range(1, n_points + 1):
            if i in chosen:
                continue
            mse = fit(chosen + [i])
            if mse < best_mse:  # strict: ties keep the smallest index
                best_i, best_mse = i, mse
        chosen.append(best_i)
        curve.append(best_mse)
    return chosen, curve


def sequential_knot_search(series, kmax: int) -> DpsResult:
    """Greedy forward knot selection, one knot at a time.

    Every remaining grid index is tried at each step, so exactly
    ``search_cost(L, kmax, "sequential")`` spline fits are performed (the
    no-knot baseline is reported separately and not counted).
    """
    t, _ = _values(series)
    n_points = t.size
    if kmax < 1 or kmax >= n_points / 2:
        raise ValueError(f"kmax must satisfy 1 <= kmax < L/2, got {kmax}")
    start = time.perf_counter()
    fit = _FitCounter(series)
    base = spline_fit(series, ()).mse
    knots, curve = _greedy(fit, n_points, kmax)
    result = DpsResult(knots, [base] + curve, 0, "sequential", fit.count,
                       time.perf_counter() - start)
    # the elbow needs curvature at k = 3; shorter searches keep every knot
    result.k = elbow(result.mse_curve) if kmax >= 3 else kmax
    return result


def simultaneous_knot_search(series, k: int, budget: int | None = None, seed=None,
                             exhaustive: bool = False) -> DpsResult:
    """Best of ``budget`` random k-subsets of grid indices.

    The sequential-search answer of the same size is always one of the
    candidates.  ``exhaustive`` (k = 1 only) scans every index instead.
    The returned ``mse_curve`` holds the no-knot MSE and the best subset's MSE.
    """
    t, _ = _values(series)
    n_points = t.size
    if budget is None:
        budget = n_points * k
    if budget < 1:
        raise ValueError("budget must be at least 1")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    fit = _FitCounter(series)
    interior = np.arange(2, n_points)
    if exhaustive:
        if k != 1:
            raise ValueError("exhaustive search is only offered for k = 1")
        candidates = [(int(i),) for i in range(1, n_points + 1)]
    else:
        seq, _ = _greedy(lambda ks: spline_fit(series, ks).mse, n_points, k)
        candidates = [tuple(sorted(seq))]
        for _ in range(budget):
            candidates.append(tuple(sorted(rng.choice(interior, size=k, replace=False).tolist())))
    best, best_mse = None, math.inf
    for cand in candidates:
        mse = fit(list(cand))
        if mse < best_mse:
            best, best_mse = cand, mse
    base = spline_fit(series, ()).mse
    return DpsResult(list(best), [base, best_mse], k, "simultaneous", fit.count,
                     time.perf_counter() - start)


def elbow(mse_curve) -> int:
    """Knot count at which the MSE curve first bends upward.

    ``mse_curve[k]`` is the MSE with ``k`` knots; entry 0 (no knots) is not
    part of the elbow scan.  Returns the smallest ``k >= 3`` with
    ``MSE(k) - 2 MSE(k-1) + MSE(k-2) > 0``.  If the curve never bends upward
    the arg-min over ``k >= 1`` is returned with a warning.
    """
    curve = np.asarray(mse_curve, dtype=float)
    if curve.size < 4:
        raise ValueError("need MSE values for at least 0..3 knots")
    knotted = curve[1:]
    second = knotted[2:] - 2.0 * knotted[1:-1] + knotted[:-2]
    hits = np.flatnonzero(second > 0)
    if hits.size:
        return int(hits[0]) + 3
    k = int(np.argmin(knotted)) + 1
    warnings.warn("MSE curve has no positive second difference; using arg-min", RuntimeWarning,
                  stacklevel=2)
    return k


def search_cost(L: int, k: int, mode: str = "sequential") -> int:
    """Number of spline fits needed to build DPSs of sizes 1..k."""
    if not 1 <= k < L:
        raise ValueError(f"need 1 <= k < L, got k={k}, L={L}")
    if mode == "sequential":
        return sum(L - (j - 1) for j in range(1, k + 1))
    if mode == "simultaneous":
        return sum(L * j for j in range(1, k + 1))
    raise ValueError(f"unknown mode {mode!r}")


def build_dps(series, kmax: int = 10) -> DpsResult:
    """Sequential search up to ``kmax`` knots with the elbow-selected size."""
    result = sequential_knot_search(series, kmax)
    logger.info("DPS %s (k=%d of %d)", result.dps, result.k, kmax)
    return result
