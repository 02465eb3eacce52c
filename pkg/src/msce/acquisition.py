"""Closed-form acquisition criteria and their maximization over a candidate set."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

__all__ = [
    "AcquisitionConfig",
    "CandidateError",
    "contour_ei",
    "global_min_ei",
    "implausibility",
    "argmax_on_candidates",
]

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


class CandidateError(RuntimeError):
    pass


@dataclass(frozen=True)
class AcquisitionConfig:
    alpha: float = 0.67
    criterion: str = "contour"
    cutoff: float = 3.0

    def __post_init__(self):
        if self.alpha <= 0 or self.cutoff <= 0:
            raise ValueError("alpha and cutoff must be positive")
        if self.criterion not in ("contour", "global-min", "implausibility"):
            raise ValueError(f"unknown criterion {self.criterion!r}")


def _pdf(u):
    return _INV_SQRT_2PI * np.exp(-0.5 * u * u)


def contour_ei(mean, sd, level, alpha=0.67):
    """Expected improvement for locating the contour ``y(x) = level``.

    Improvement is ``eps^2 - min((Y - level)^2, eps^2)`` with ``eps = alpha * sd``
    and ``Y ~ N(mean, sd^2)``.  Vectorized over ``mean`` and ``sd``.
    """
    mean, sd = np.broadcast_arrays(np.asarray(mean, dtype=float), np.asarray(sd, dtype=float))
    out = np.zeros(mean.shape)
    pos = sd > 0
    m, s = mean[pos], sd[pos]
    eps = alpha * s
    gap = m - level
    u1 = (level - m - eps) / s
    u2 = (level - m + eps) / s
    mass = ndtr(u2) - ndtr(u1)
    p1, p2 = _pdf(u1), _pdf(u2)
    ei = ((eps**2 - gap**2) * mass
          + s**2 * ((u2 * p2 - u1 * p1) - mass)
          + 2.0 * gap * s * (p2 - p1))
    out[pos] = np.maximum(ei, 0.0)
    return out if out.ndim else float(out)


def global_min_ei(mean, sd, best):
    """Expected improvement below the incumbent minimum ``best``."""
    mean, sd = np.broadcast_arrays(np.asarray(mean, dtype=float), np.asarray(sd, dtype=float))
    gain = best - mean
    out = np.array(np.maximum(gain, 0.0), dtype=float)
    pos = sd > 0
    z = gain[pos] / sd[pos]
    out[pos] = np.maximum(gain[pos] * ndtr(z) + sd[pos] * _pdf(z), 0.0)
    return out if out.ndim else float(out)


def implausibility(mean, sd, target, axis=-1):
    """Largest standardized discrepancy ``|mean_j - target_j| / sd_j`` over ``j``.

    A zero ``sd`` gives 0 for an exact match and ``inf`` otherwise.
    """
    mean, sd, target = np.broadcast_arrays(np.asarray(mean, dtype=float),
                                           np.asarray(sd, dtype=float),
                                           np.asarray(target, dtype=float))
    gap = np.abs(mean - target)
    with np.errstate(divide="ignore", invalid="ignore"):
        im = np.where(sd > 0, gap / np.where(sd > 0, sd, 1.0), np.where(gap > 0, np.inf, 0.0))
    return np.max(im, axis=axis)


def argmax_on_candidates(criterion, candidates, existing=None, radius=1e-9):
    """Row of ``candidates`` maximizing ``criterion(candidates)``.

    Candidates within ``radius`` (sup-norm) of a row of ``existing`` are
    skipped; ties go to the lowest row.  Returns ``(point, value, index)``.
    """
    candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
    if candidates.shape[0] == 0:
        raise CandidateError("candidate set is empty")
    keep = np.ones(candidates.shape[0], dtype=bool)
    if existing is not None and len(existing):
        existing = np.atleast_2d(existing)
        for row in existing:
            keep &= np.max(np.abs(candidates - row), axis=1) > radius
    if not keep.any():
        raise CandidateError("every candidate coincides with a training point; "
                             "use a larger candidate set")
    values = np.asarray(criterion(candidates), dtype=float)
    values = np.where(keep, values, -np.inf)
    idx = int(np.argmax(values))
    return candidates[idx].copy(), float(values[idx]), idx
