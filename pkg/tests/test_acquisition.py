import numpy as np
import pytest
from hypothesis import given, strategies as st

from msce.acquisition import (AcquisitionConfig, CandidateError, argmax_on_candidates, contour_ei,
                              global_min_ei, implausibility)

GRID = [(g, s) for s in (0.5, 1.0, 2.0, 0.1) for g in (0.0, 0.3, -1.0, 2.5, 10.0)]


def _mc_contour(gap, s, alpha, rng, n=10**6):
    y = gap + s * rng.standard_normal(n)
    eps = alpha * s
    imp = np.maximum(eps**2 - y**2, 0.0)
    return imp.mean(), imp.std(ddof=1) / np.sqrt(n)


def test_contour_ei_matches_monte_carlo():
    rng = np.random.default_rng(11)
    for gap, s in GRID:
        gap = gap * s  # includes |y - a| = 10 s
        mc, se = _mc_contour(gap, s, 0.67, rng)
        assert abs(contour_ei(gap, s, 0.0, 0.67) - mc) <= 3 * se + 1e-15, (gap, s)


def test_global_min_ei_matches_monte_carlo():
    rng = np.random.default_rng(12)
    for gap, s in GRID:
        mean = gap * s
        y = mean + s * rng.standard_normal(10**6)
        imp = np.maximum(0.0 - y, 0.0)
        mc, se = imp.mean(), imp.std(ddof=1) / 1e3
        assert abs(global_min_ei(mean, s, 0.0) - mc) <= 3 * se + 1e-15, (mean, s)


def test_contour_ei_at_level_closed_form():
    # gap 0: E[(eps^2 - Y^2)+] with Y ~ N(0, s^2), eps = alpha s
    from scipy.integrate import quad
    from scipy.stats import norm
    a, s = 0.67, 1.7
    want = quad(lambda z: (a**2 - z**2) * s**2 * norm.pdf(z), -a, a)[0]
    assert contour_ei(3.0, s, 3.0, a) == pytest.approx(want, rel=1e-10)


@given(st.floats(-50, 50), st.floats(1e-3, 50), st.floats(-50, 50), st.floats(0.1, 3))
def test_contour_ei_nonnegative_and_symmetric(mean, sd, level, alpha):
    v = contour_ei(mean, sd, level, alpha)
    assert v >= 0
    assert v == pytest.approx(contour_ei(2 * level - mean, sd, level, alpha), rel=1e-9, abs=1e-12)
    assert v <= (alpha * sd) ** 2 * (1 + 1e-12)


@given(st.floats(-50, 50), st.floats(1e-3, 50), st.floats(-50, 50))
def test_global_min_ei_bounds(mean, sd, best):
    v = global_min_ei(mean, sd, best)
    assert v >= max(best - mean, 0.0) - 1e-9 * (1 + abs(best - mean))


def test_zero_sd():
    assert contour_ei(1.0, 0.0, 1.0) == 0.0
    assert global_min_ei(0.5, 0.0, 1.0) == 0.5
    assert global_min_ei(1.5, 0.0, 1.0) == 0.0


def test_vectorized_shapes():
    out = contour_ei(np.zeros(4), np.ones(4), 0.0)
    assert out.shape == (4,)
    assert isinstance(contour_ei(0.0, 1.0, 0.0), float)


def test_implausibility_examples():
    assert implausibility([1.0, 2.0], [0.5, 1.0], [0.0, 0.0]) == 2.0
    assert implausibility([1.0], [0.0], [1.0]) == 0.0
    assert implausibility([1.0], [0.0], [1.5]) == np.inf
    im = implausibility(np.array([[0.0, 3.0], [1.0, 1.0]]), np.ones((2, 2)), [0.0, 0.0])
    np.testing.assert_array_equal(im, [3.0, 1.0])


def test_argmax_ties_and_exclusion():
    cands = np.array([[0.1], [0.5], [0.9]])
    x, v, i = argmax_on_candidates(lambda c: np.ones(len(c)), cands)
    assert i == 0 and v == 1.0
    x, v, i = argmax_on_candidates(lambda c: -np.abs(c[:, 0] - 0.5), cands, existing=[[0.5]])
    assert i in (0, 2)
    with pytest.raises(CandidateError):
        argmax_on_candidates(lambda c: c[:, 0], cands, existing=cands)


def test_config_validation():
    with pytest.raises(ValueError):
        AcquisitionConfig(alpha=0)
    with pytest.raises(ValueError):
        AcquisitionConfig(criterion="ucb")
