import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import naive_lrt
from stepshift import kernels
from stepshift.stats import (
    SegmentTooShortError,
    as_series,
    first_argmax,
    null_profiles,
    segment_stats,
    split_scan,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_segment_stats_constant_is_degenerate():
    s = segment_stats([0.0, 0.0, 0.0, 0.0], 0, 4)
    assert s.n == 4
    assert s.mean == 0.0
    assert s.variance_mle == 0.0
    assert s.degenerate
    assert np.isfinite(s.loglik)


def test_segment_stats_two_points():
    s = segment_stats([0, 1, 10, 11], 0, 2)
    assert s.n == 2
    assert s.mean == pytest.approx(0.5)
    assert s.variance_mle == pytest.approx(0.25)
    assert not s.degenerate


def test_segment_stats_whole_series():
    s = segment_stats([0, 1, 10, 11], 0, 4)
    assert s.mean == pytest.approx(5.5)
    assert s.variance_mle == pytest.approx(25.25)
    expected = -2 * np.log(2 * np.pi) - 2 * np.log(25.25) - 2
    assert s.loglik == pytest.approx(expected)


def test_segment_stats_rejects_empty_range():
    with pytest.raises(ValueError):
        segment_stats([1.0, 2.0, 3.0], 2, 2)


def test_split_scan_hand_value():
    split = split_scan([0, 1, 10, 11])
    assert split.lrt.shape == (1,)
    assert split.lrt[0] == pytest.approx(4 * np.log(25.25) - 2 * np.log(0.25) - 2 * np.log(0.25), rel=1e-12)


def test_split_scan_matches_loglik_difference():
    x = np.array([0.3, -1.2, 0.8, 2.9, 3.3, 2.1, 4.0])
    split = split_scan(x)
    full = segment_stats(x)
    for m1, value in zip(split.m1, split.lrt):
        la = segment_stats(x, 0, m1).loglik + segment_stats(x, m1, x.size).loglik
        assert value == pytest.approx(-2 * (full.loglik - la), rel=1e-10)


def test_split_scan_constant_is_all_zero():
    split = split_scan(np.full(12, 3.7))
    assert np.all(split.lrt == 0.0)
    assert split.constant


def test_split_scan_subsegment_offsets():
    x = np.random.default_rng(3).standard_normal(30)
    sub = split_scan(x, 5, 20)
    assert sub.segment_offset == 5
    assert sub.segment_length == 15
    np.testing.assert_allclose(sub.lrt, split_scan(x[5:20]).lrt, rtol=0, atol=0)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_split_scan_too_short(n):
    with pytest.raises((SegmentTooShortError, ValueError)):
        split_scan(np.arange(n, dtype=float))


def test_as_series_rejects_non_finite():
    with pytest.raises(ValueError, match="index 2"):
        as_series([1.0, 2.0, np.nan])


def test_first_argmax_breaks_ties_low():
    assert first_argmax([1.0, 3.0, 3.0, 2.0]) == 1


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.integers(4, 50), elements=finite))
def test_split_scan_matches_naive_oracle(x):
    expected = naive_lrt(x)
    got = split_scan(x).lrt
    # atol only matters for statistics that are exactly zero in exact arithmetic
    np.testing.assert_allclose(got, expected, rtol=1e-9, atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.integers(4, 60), elements=finite))
def test_lrt_nonnegative(x):
    assert np.all(split_scan(x).lrt >= 0.0)


@settings(max_examples=200, deadline=None)
@given(
    arrays(np.int64, st.integers(4, 60), elements=st.integers(-4000, 4000)),
    st.integers(-5, 5),
    st.integers(-8000, 8000),
)
def test_affine_equivariance(ints, log2_scale, shift):
    # dyadic data, power-of-two scale and a multiple-of-1/8 shift keep a*x + b exact
    x = ints / 8.0
    moved = split_scan(2.0**log2_scale * x + shift / 8.0).lrt
    np.testing.assert_allclose(moved, split_scan(x).lrt, rtol=1e-9, atol=1e-12)


def test_affine_equivariance_argmax_on_gaussian_data():
    rng = np.random.default_rng(11)
    for _ in range(50):
        x = rng.standard_normal(rng.integers(10, 300))
        base = split_scan(x).lrt
        moved = split_scan(3.5 * x - 17.0).lrt
        np.testing.assert_allclose(moved, base, rtol=1e-9, atol=1e-9)
        assert first_argmax(moved) == first_argmax(base)


def test_backends_agree():
    rng = np.random.default_rng(5)
    block = rng.standard_normal((300, 73)) * 4 + 2
    block[7, :30] = 1.0  # floored side
    block[9] = 2.5  # constant row
    outs = [mod.lrt_profiles(block, 1e-12) for mod in kernels.available_backends().values()]
    for other in outs[1:]:
        np.testing.assert_allclose(other, outs[0], rtol=1e-12, atol=1e-12)


def test_null_profiles_shape():
    prof = null_profiles(np.random.default_rng(0).standard_normal((5, 10)))
    assert prof.shape == (5, 7)


def test_variance_floor_side_gives_large_finite_statistic():
    x = np.concatenate([np.zeros(20), np.random.default_rng(2).normal(5, 1, 20)])
    lrt = split_scan(x).lrt
    assert np.all(np.isfinite(lrt))
    assert first_argmax(lrt) + 2 == 20
    assert lrt.max() > 100
