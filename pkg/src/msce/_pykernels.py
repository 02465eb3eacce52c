"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``."""
import numpy as np


def corr_cross(a, b, theta, power):
    diff = np.abs(a[:, None, :] - b[None, :, :])
    return np.exp(-np.sum(theta * diff**power, axis=-1))


def corr_self(a, theta, power):
    r = corr_cross(a, a, theta, power)
    np.fill_diagonal(r, 1.0)
    return r


def maxpro_sum(x):
    i, j = np.triu_indices(x.shape[0], k=1)
    prod = np.prod((x[i] - x[j]) ** 2, axis=1)
    if np.any(prod == 0.0):
        return np.inf
    return float(np.sum(1.0 / prod))


def min_distance(x):
    i, j = np.triu_indices(x.shape[0], k=1)
    if i.size == 0:
        return np.inf
    return float(np.sqrt(np.min(np.sum((x[i] - x[j]) ** 2, axis=1))))
