"""Ordinary-kriging Gaussian process with power-exponential correlation.

The correlation between inputs ``u`` and ``v`` is
``exp(-sum_k theta_k |u_k - v_k|^p_k)``.  The mean and process variance are
profiled out of the likelihood, and ``theta`` is found by multistart
Nelder-Mead on ``log(theta)`` inside a box.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize

from . import kernels

__all__ = ["GpConfig", "GpModel", "Prediction", "GpFitError", "fit", "predict"]

logger = logging.getLogger(__name__)


class GpFitError(RuntimeError):
    pass


@dataclass(frozen=True)
class GpConfig:
    power: float = 1.95
    nugget: float = 1e-8
    max_nugget: float = 1e-4
    theta_bounds: tuple = (1e-2, 1e2)
    n_starts: int = 5
    theta: tuple | None = None  # fixed correlation parameters: skip the search
    maxiter: int = 400

    def __post_init__(self):
        if not 0 < self.power <= 2:
            raise ValueError("power must lie in (0, 2]")
        if self.nugget < 0 or self.max_nugget < self.nugget:
            raise ValueError("need 0 <= nugget <= max_nugget")
        lo, hi = self.theta_bounds
        if not 0 < lo < hi:
            raise ValueError("theta bounds must satisfy 0 < lo < hi")


@dataclass
class Prediction:
    mean: np.ndarray
    var: np.ndarray

    @property
    def sd(self) -> np.ndarray:
        return np.sqrt(self.var)


@dataclass
class GpModel:
    X: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    power: np.ndarray
    mu: float
    sigma2: float
    nugget: float
    loglik: float
    chol: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    start_logliks: list = field(default_factory=list, repr=False)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def predict(self, x) -> Prediction:
        return predict(self, x)

    def to_dict(self) -> dict:
        return {
            "X": self.X.tolist(),
            "y": self.y.tolist(),
            "theta": self.theta.tolist(),
            "power": self.power.tolist(),
            "mu": self.mu,
            "sigma2": self.sigma2,
            "nugget": self.nugget,
            "loglik": self.loglik,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "GpModel":
        X = np.asarray(data["X"], dtype=float)
        y = np.asarray(data["y"], dtype=float)
        theta = np.asarray(data["theta"], dtype=float)
        power = np.asarray(data["power"], dtype=float)
        chol = _cholesky(X, theta, power, float(data["nugget"]))
        alpha = linalg.cho_solve((chol, True), y - data["mu"])
        return cls(X, y, theta, power, float(data["mu"]), float(data["sigma2"]),
                   float(data["nugget"]), float(data["loglik"]), chol, alpha)

    @classmethod
    def loads(cls, text: str) -> "GpModel":
        return cls.from_dict(json.loads(text))


def _cholesky(X, theta, power, nugget):
    R = kernels.corr_self(X, theta, power)
    if nugget:
        R[np.diag_indices_from(R)] += nugget
    return linalg.cholesky(R, lower=True, check_finite=False)


def _nugget_ladder(config: GpConfig):
    nug = config.nugget
    yield nug
    nug = nug * 10 if nug > 0 else 1e-10
    while nug <= config.max_nugget * (1 + 1e-12):
        yield nug
        nug *= 10


def _profile(X, y, theta, power, config):
    """Profiled quantities at ``theta``; None when no nugget on the ladder works."""
    n = y.size
    for nugget in _nugget_ladder(config):
        try:
            L = _cholesky(X, theta, power, nugget)
        except linalg.LinAlgError:
            continue
        ones = np.ones(n)
        Ri1 = linalg.cho_solve((L, True), ones, check_finite=False)
        Riy = linalg.cho_solve((L, True), y, check_finite=False)
        mu = float(ones @ Riy) / float(ones @ Ri1)
        resid = y - mu
        alpha = linalg.cho_solve((L, True), resid, check_finite=False)
        sigma2 = max(float(resid @ alpha) / n, 0.0)
        logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
        if sigma2 > 0:
            loglik = -0.5 * (n * math.log(2 * math.pi * sigma2) + n + logdet)
        else:
            loglik = math.inf
        return dict(L=L, mu=mu, sigma2=sigma2, alpha=alpha, loglik=loglik, nugget=nugget)
    return None


def _start_points(d, n_starts, lo, hi):
    # fixed, seed-free starts: centre of the box plus a scrambled lattice
    if n_starts <= 1:
        return np.full((1, d), 0.5 * (lo + hi))
    frac = np.arange(n_starts) / (n_starts - 1)
    cols = [np.roll(frac, k * (1 + n_starts // 3)) for k in range(d)]
    pts = lo + np.column_stack(cols) * (hi - lo)
    pts[0] = 0.5 * (lo + hi)
    return np.clip(pts, lo, hi)


def fit(X, y, config: GpConfig | None = None) -> GpModel:
    """Maximum-likelihood fit of the correlation parameters."""
    config = config or GpConfig()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    n, d = X.shape
    if y.size != n:
        raise ValueError(f"X has {n} rows but y has {y.size} values")
    if n < 1 or not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("training data must be non-empty and finite")
    if np.unique(X, axis=0).shape[0] != n:
        raise ValueError("training inputs contain duplicate rows")
    power = np.full(d, float(config.power))
    lo, hi = (math.log(b) for b in config.theta_bounds)

    def build(log_theta, starts=()):
        theta = np.exp(np.asarray(log_theta, dtype=float))
        prof = _profile(X, y, theta, power, config)
        if prof is None:
            raise GpFitError(
                f"correlation matrix not positive definite at theta={theta.tolist()} "
                f"even with nugget {config.max_nugget:g}; n={n}, "
                f"min pairwise gap={_min_gap(X):.3g}"
            )
        return GpModel(X.copy(), y.copy(), theta, power, prof["mu"], prof["sigma2"],
                       prof["nugget"], prof["loglik"], prof["L"], prof["alpha"], list(starts))

    if config.theta is not None:
        return build(np.log(np.broadcast_to(np.asarray(config.theta, dtype=float), (d,))))
    if n == 1 or np.ptp(y) == 0.0:
        # nothing to learn from a constant response
        return build(np.full(d, 0.5 * (lo + hi)))

    def objective(log_theta):
        prof = _profile(X, y, np.exp(log_theta), power, config)
        if prof is None:
            return 1e300
        return -prof["loglik"]

    bounds = [(lo, hi)] * d
    best_x, best_f = None, math.inf
    start_logliks = []
    for x0 in _start_points(d, config.n_starts, lo, hi):
        f0 = objective(x0)
        start_logliks.append(-f0)
        res = optimize.minimize(objective, x0, method="Nelder-Mead", bounds=bounds,
                                options={"maxiter": config.maxiter * d, "xatol": 1e-4,
                                         "fatol": 1e-9})
        cand_x, cand_f = (res.x, res.fun) if res.fun <= f0 else (x0, f0)
        if _better(cand_f, cand_x, best_f, best_x):
            best_x, best_f = np.clip(cand_x, lo, hi), cand_f
    model = build(best_x, start_logliks)
    logger.debug("GP fit n=%d theta=%s loglik=%.4g nugget=%g", n, model.theta, model.loglik,
                 model.nugget)
    return model


def _better(f, x, best_f, best_x):
    if best_x is None:
        return True
    tol = 1e-10 * max(1.0, abs(best_f))
    if f < best_f - tol:
        return True
    return abs(f - best_f) <= tol and np.linalg.norm(x) < np.linalg.norm(best_x)


def _min_gap(X):
    if X.shape[0] < 2:
        return math.inf
    return kernels.min_distance(X)


def predict(model: GpModel, x) -> Prediction:
    """Kriging mean and variance at the rows of ``x``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    r = kernels.corr_cross(x, model.X, model.theta, model.power)
    mean = model.mu + r @ model.alpha
    v = linalg.solve_triangular(model.chol, r.T, lower=True, check_finite=False)
    var = model.sigma2 * (1.0 - np.einsum("ij,ij->j", v, v))
    return Prediction(mean, np.maximum(var, 0.0))
