import numpy as np
import pytest
from hypothesis import given, strategies as st

from msce.design import lhd, maximin_value, maxpro_value, random_lhd


def _is_latin(x):
    n = x.shape[0]
    return all(sorted(np.floor(x[:, c] * n).astype(int)) == list(range(n))
               for c in range(x.shape[1]))


@given(st.integers(2, 30), st.integers(1, 5), st.sampled_from(["maxpro", "maximin", "random"]),
       st.integers(0, 10**6))
def test_every_design_is_latin(n, d, criterion, seed):
    design = lhd(n, d, seed, criterion, effort=50)
    assert design.points.shape == (n, d)
    assert _is_latin(design.points)
    assert np.all((design.points > 0) & (design.points < 1))


@given(st.integers(2, 40), st.integers(1, 4), st.integers(0, 10**6))
def test_random_lhd_is_latin(n, d, seed):
    assert _is_latin(random_lhd(n, d, np.random.default_rng(seed)))


@pytest.mark.parametrize("criterion", ["maxpro", "maximin"])
def test_exchange_never_worsens(criterion):
    for seed in range(5):
        design = lhd(15, 2, seed, criterion, effort=500)
        if criterion == "maxpro":
            assert design.value <= design.start_value
            assert design.value == pytest.approx(maxpro_value(design.points))
        else:
            assert design.value >= design.start_value
            assert design.value == pytest.approx(maximin_value(design.points))


def test_more_effort_is_no_worse_on_average():
    short = np.mean([lhd(20, 3, s, "maxpro", effort=20).value for s in range(8)])
    long = np.mean([lhd(20, 3, s, "maxpro", effort=2000).value for s in range(8)])
    assert long < short


def test_reproducible():
    a = lhd(12, 3, 7).points
    b = lhd(12, 3, 7).points
    np.testing.assert_array_equal(a, b)


def test_stratum_centres_without_jitter():
    x = lhd(10, 2, 0).points
    np.testing.assert_allclose(np.sort(x[:, 0]), (np.arange(10) + 0.5) / 10)


def test_bad_arguments():
    with pytest.raises(ValueError):
        lhd(1, 2)
    with pytest.raises(ValueError):
        lhd(5, 2, criterion="sobol")


def test_csv(tmp_path):
    design = lhd(4, 2, 1)
    design.to_csv(tmp_path / "d.csv")
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "x1,x2" and len(lines) == 5
