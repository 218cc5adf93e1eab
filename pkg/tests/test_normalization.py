import numpy as np
import pytest

from stepshift import rng
from stepshift.normalization import (
    NormalizationStore,
    NormalizationTable,
    estimate_table,
    normalize,
    null_moments,
    read_table,
    smooth_profile,
    write_table,
)
from stepshift.stats import null_profiles, split_scan


@pytest.fixture(scope="module")
def raw200():
    return null_moments(200, 5000, 11)


def test_table_shape_and_profile(tables):
    t = tables.get(200)
    assert t.e_lrt.shape == (197,)
    assert np.all(t.e_lrt > 0)
    mid = t.at(100)
    assert 1.5 < mid < 3.0
    assert t.at(2) > mid and t.at(198) > mid


def test_length_four_single_entry():
    t = estimate_table(4, 1000, 1)
    assert t.e_lrt.shape == (1,)
    assert t.replications == 10000


def test_deterministic():
    a = estimate_table(30, 200, 5)
    b = estimate_table(30, 200, 5)
    assert np.array_equal(a.e_lrt, b.e_lrt)


def test_thread_count_does_not_matter():
    a = estimate_table(40, 1200, 9, threads=1)
    b = estimate_table(40, 1200, 9, threads=4)
    assert np.array_equal(a.e_lrt, b.e_lrt)


def test_symmetric_in_expectation(raw200):
    mean, se = raw200
    diff = mean - mean[::-1]
    assert np.all(np.abs(diff) <= 3 * np.sqrt(2) * se + 1e-12)


def test_smoothed_monotone_halves(tables):
    e = tables.get(200).e_lrt
    left = e[: 100 - 1]  # m1 = 2 .. 100
    right = e[100 - 1:]
    assert np.all(np.diff(left) <= 0)
    assert np.all(np.diff(right) >= 0)


def test_smooth_profile_keeps_monotone_input():
    v = np.array([5.0, 4.0, 3.0, 3.0, 4.0, 5.0, 6.0])
    assert np.array_equal(smooth_profile(v), v)


def test_preconditions():
    with pytest.raises(ValueError):
        estimate_table(3, 1000, 1)
    with pytest.raises(ValueError):
        estimate_table(10, 99, 1)
    with pytest.raises(ValueError):
        NormalizationTable(5, np.array([1.0, 0.0]), 100, 1)
    with pytest.raises(ValueError):
        NormalizationTable(5, np.array([1.0]), 100, 1)


def test_normalize_zero_numerator():
    split = split_scan(np.ones(10))
    t = estimate_table(10, 200, 1)
    out = normalize(split, t)
    assert np.all(out.nlrt == 0) and out.max_nlrt == 0


def test_normalize_identity():
    x = np.random.default_rng(0).standard_normal(20)
    split = split_scan(x)
    t = NormalizationTable(20, split.lrt.copy(), 100, 0)
    np.testing.assert_allclose(normalize(split, t).nlrt, 1.0, rtol=1e-15)


def test_normalize_length_mismatch():
    split = split_scan(np.random.default_rng(0).standard_normal(20))
    with pytest.raises(ValueError):
        normalize(split, estimate_table(21, 100, 1))


def test_normalized_null_mean_near_one(tables):
    table = tables.get(200)
    prof = null_profiles(rng.null_block(200, 0, 10000, 777, rng.VERIFICATION))
    mean = (prof / table.e_lrt).mean(axis=0)
    assert np.all(np.abs(mean - 1.0) < 0.1)


def test_file_round_trip_bit_exact(tmp_path):
    t = estimate_table(25, 300, 4, smooth=False)
    path = write_table(t, tmp_path / "t.tsv")
    back = read_table(path)
    assert back == t
    assert np.array_equal(back.e_lrt, t.e_lrt)
    lines = path.read_text().splitlines()
    assert lines[0] == "stepshift-normtable v1"
    assert lines[1] == "n=25 reps=300 seed=4 smoothed=0"
    assert lines[2].startswith("2\t")


def test_store_caches_on_disk(tmp_path):
    s1 = NormalizationStore(replications=200, seed=3, cache_dir=tmp_path)
    assert not s1.cached(30)
    t1 = s1.get(30)
    assert s1.path_for(30).exists()
    s2 = NormalizationStore(replications=200, seed=3, cache_dir=tmp_path)
    assert s2.cached(30)
    assert s2.get(30) == t1
