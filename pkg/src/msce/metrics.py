"""Goodness-of-fit between a target series and the series at an estimated solution."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .simulators import TimeSeries

__all__ = ["GofReport", "rmse", "norm_d", "r_squared", "nse", "gof", "format_value"]

NEG_INF = "-inf"


def _pair(g_hat, g0):
    if isinstance(g_hat, TimeSeries) and isinstance(g0, TimeSeries):
        if g_hat.grid != g0.grid:
            raise ValueError("series are on different time grids")
    a = np.asarray(getattr(g_hat, "values", g_hat), dtype=float)
    b = np.asarray(getattr(g0, "values", g0), dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"series lengths differ: {a.shape} vs {b.shape}")
    return a, b


def _sums(g_hat, g0):
    a, b = _pair(g_hat, g0)
    ss_res = float(np.sum((b - a) ** 2))
    ss_tot = float(np.sum((b - b.mean()) ** 2))
    return ss_res, ss_tot, b.size


def rmse(g_hat, g0) -> float:
    ss_res, _, n = _sums(g_hat, g0)
    return math.sqrt(ss_res / n)


def norm_d(g_hat, g0) -> float:
    """log(SS_res / SS_tot); ``-inf`` for a perfect match."""
    ss_res, ss_tot, _ = _sums(g_hat, g0)
    if ss_tot == 0:
        raise ValueError("target series is constant; normalized discrepancy undefined")
    if ss_res == 0:
        return -math.inf
    return math.log(ss_res / ss_tot)


def r_squared(g_hat, g0) -> float:
    """R^2 of ``g0 = g_hat + error`` with slope 1 and intercept 0 (Nash-Sutcliffe)."""
    ss_res, ss_tot, _ = _sums(g_hat, g0)
    if ss_tot == 0:
        raise ValueError("target series is constant; R^2 undefined")
    return 1.0 - ss_res / ss_tot


nse = r_squared


@dataclass
class GofReport:
    rmse: float
    r_squared: float
    norm_d: float
    spread: float | None = None
    runtime: float | None = None
    sim_calls: int | None = None

    def to_dict(self) -> dict:
        return {k: format_value(v) if isinstance(v, float) else v for k, v in asdict(self).items()}


def gof(g_hat, g0, spread=None, runtime=None, sim_calls=None) -> GofReport:
    return GofReport(rmse(g_hat, g0), r_squared(g_hat, g0), norm_d(g_hat, g0), spread, runtime,
                     sim_calls)


def format_value(value) -> str | float | None:
    """Report encoding: ``-inf`` becomes a tagged string, never a bare float."""
    if value is None:
        return None
    if isinstance(value, float) and math.isinf(value):
        return NEG_INF if value < 0 else "inf"
    return value
