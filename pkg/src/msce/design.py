"""Latin hypercube designs on the unit cube.

Optimized designs start from a random Latin hypercube and run a
coordinate-exchange search: swap two entries of one column, keep the swap only
if the criterion improves.  Swapping within a column keeps every column a
permutation of the strata, so the result is always a Latin hypercube.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist

from . import kernels

__all__ = ["Design", "lhd", "random_lhd", "maximin_value", "maxpro_value"]

CRITERIA = ("maximin", "maxpro", "random")


@dataclass
class Design:
    points: np.ndarray
    criterion: str
    seed: object
    effort: int
    value: float
    start_value: float

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{i + 1}" for i in range(self.d)])
            writer.writerows([[repr(float(v)) for v in row] for row in self.points])


def maximin_value(x) -> float:
    """Smallest pairwise Euclidean distance (larger is better)."""
    return kernels.min_distance(x)


def maxpro_value(x) -> float:
    """Maximum-projection criterion (smaller is better, inf on tied projections)."""
    return kernels.maxpro_sum(x)


def _phi(x, p=15):
    # Morris-Mitchell tie-breaker among designs with equal minimum distance
    return float(np.sum(pdist(x) ** (-float(p))))


def _start(n, d, rng, jitter):
    perms = np.column_stack([rng.permutation(n) for _ in range(d)]) if d else np.empty((n, 0))
    offset = rng.uniform(size=(n, d)) if jitter else 0.5
    return perms, offset


def _to_points(perms, offset, n):
    return (perms + offset) / n


def random_lhd(n: int, d: int, rng: np.random.Generator, jitter: bool = True) -> np.ndarray:
    """Plain random Latin hypercube (used for candidate and extraction sets)."""
    perms, offset = _start(n, d, rng, jitter)
    return _to_points(perms, offset, n)


def lhd(n: int, d: int, seed=None, criterion: str = "maxpro", effort: int = 2000,
        jitter: bool = False) -> Design:
    """Latin hypercube of ``n`` points in ``[0, 1]^d``.

    ``criterion`` is ``"maximin"``, ``"maxpro"`` or ``"random"``; ``effort`` is
    the number of exchange proposals.  Points sit at stratum centres unless
    ``jitter`` is set.
    """
    if n < 2 or d < 1:
        raise ValueError(f"need n >= 2 and d >= 1, got n={n}, d={d}")
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    perms, offset = _start(n, d, rng, jitter)
    x = _to_points(perms, offset, n)

    if criterion == "random":
        value = maximin_value(x)
        return Design(x, criterion, seed, 0, value, value)

    if criterion == "maxpro":
        def score(z):
            return (maxpro_value(z),)
    else:
        def score(z):
            return (-maximin_value(z), _phi(z))

    current = score(x)
    start_value = current[0]
    for _ in range(effort):
        col = rng.integers(d)
        i, j = rng.choice(n, size=2, replace=False)
        x[[i, j], col] = x[[j, i], col]
        proposal = score(x)
        if proposal < current:
            current = proposal
        else:
            x[[i, j], col] = x[[j, i], col]

    sign = -1.0 if criterion == "maximin" else 1.0
    return Design(x, criterion, seed, effort, sign * current[0], sign * start_value)
