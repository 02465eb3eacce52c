import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from msce.metrics import format_value, gof, nse, norm_d, r_squared, rmse

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_hand_computed_values():
    g0 = np.array([1.0, 2.0, 3.0, 4.0])
    gh = np.array([1.0, 2.0, 3.0, 5.0])
    assert rmse(gh, g0) == pytest.approx(0.5)
    # SS_res = 1, SS_tot = 5
    assert r_squared(gh, g0) == pytest.approx(0.8)
    assert norm_d(gh, g0) == pytest.approx(math.log(0.2))


def test_perfect_match():
    g0 = np.linspace(0, 1, 50) ** 2
    assert rmse(g0, g0) == 0.0
    assert norm_d(g0, g0) == -math.inf
    assert r_squared(g0, g0) == 1.0
    assert gof(g0, g0).to_dict()["norm_d"] == "-inf"


def test_mean_prediction_has_zero_norm_d():
    g0 = np.sin(np.linspace(0, 3, 40))
    assert norm_d(np.full_like(g0, g0.mean()), g0) == pytest.approx(0.0, abs=1e-12)


def test_constant_target_undefined():
    with pytest.raises(ValueError):
        norm_d(np.ones(5), np.full(5, 2.0))
    with pytest.raises(ValueError):
        r_squared(np.ones(5), np.full(5, 2.0))


def test_length_mismatch():
    with pytest.raises(ValueError):
        rmse(np.ones(3), np.ones(4))


def test_nse_alias():
    assert nse is r_squared
    assert format_value(1.5) == 1.5 and format_value(None) is None


@given(arrays(float, 30, elements=finite), arrays(float, 30, elements=finite))
def test_r2_is_one_minus_exp_norm_d(a, b):
    if np.ptp(b) < 1e-6 or np.array_equal(a, b):
        return
    assert r_squared(a, b) == pytest.approx(1 - math.exp(norm_d(a, b)), rel=1e-12, abs=1e-12)


@given(arrays(float, 20, elements=finite), arrays(float, 20, elements=finite))
def test_rmse_symmetric_and_nonnegative(a, b):
    assert rmse(a, b) == rmse(b, a) >= 0
