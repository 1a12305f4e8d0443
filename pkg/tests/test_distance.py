import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reliefbench.data import Dataset, prepare
from reliefbench.distance import (SKIP, cached_pairwise_distances, diff,
                                  global_threshold, load_distances,
                                  pairwise_distances, save_distances, target_stats)
from reliefbench.errors import DataError


def _prep(X, y=None):
    X = np.asarray(X, dtype=float)
    y = np.arange(len(X)) % 2 if y is None else y
    return prepare(Dataset.from_arrays(X, y))


def test_diff_discrete_and_skip():
    data, s = _prep([[0, 1], [1, np.nan], [0, 1]])
    assert diff(0, 0, 1, data, s) == 1.0
    assert diff(0, 0, 2, data, s) == 0.0
    assert diff(1, 0, 1, data, s) is SKIP


def test_diff_continuous_scaled_by_range():
    col = np.linspace(2.0, 7.0, 12)
    data, s = _prep(col.reshape(-1, 1))
    assert diff(0, 0, 11, data, s) == pytest.approx(1.0)
    assert diff(0, 0, 1, data, s) == pytest.approx(1 / 11)


def test_manhattan_distance_on_epistasis_fixture(epistasis8):
    data, s = prepare(epistasis8)
    dm = pairwise_distances(data, s)
    assert dm(0, 1) == 1.0   # differ on A3 only
    assert dm(0, 3) == 3.0   # differ everywhere
    assert dm(2, 2) == 0.0


def test_missing_rescale():
    data, s = _prep([[0, 0, 0, 0], [1, np.nan, 1, 0], [0, 1, 1, 1]])
    dm = pairwise_distances(data, s)
    assert dm.valid(0, 1) == 3
    assert dm(0, 1) == pytest.approx(2 * 4 / 3)


def test_pair_without_shared_feature_raises():
    data, s = _prep([[0, np.nan], [np.nan, 1], [1, 1]])
    with pytest.raises(DataError, match="instances 0 and 1"):
        pairwise_distances(data, s)


def test_condensed_index_layout():
    data, s = _prep(np.arange(10).reshape(5, 2) % 3)
    dm = pairwise_distances(data, s)
    seen = sorted(dm.index(i, j) for i in range(5) for j in range(i + 1, 5))
    assert seen == list(range(10))
    assert dm.index(3, 1) == dm.index(1, 3)


def test_target_stats_population_sd(epistasis8):
    data, s = prepare(epistasis8)
    ts = target_stats(pairwise_distances(data, s), 0)
    assert ts.mean == pytest.approx(12 / 7)
    assert ts.sd == pytest.approx(np.sqrt(24) / 7)
    assert ts.near_bound < ts.mean < ts.far_bound


def test_global_threshold(epistasis8):
    data, s = prepare(epistasis8)
    assert global_threshold(pairwise_distances(data, s)) == pytest.approx(12 / 7)


def test_cache_roundtrip(tmp_path, epistasis8):
    data, s = prepare(epistasis8)
    dm = pairwise_distances(data, s)
    path = tmp_path / "d.rbdm"
    save_distances(dm, path, data.a)
    again, a = load_distances(path)
    assert a == 3
    np.testing.assert_array_equal(again.distances, dm.distances)
    np.testing.assert_array_equal(again.valid_counts, dm.valid_counts)
    raw = path.read_bytes()
    path.write_bytes(raw[:-3])
    with pytest.raises(DataError):
        load_distances(path)
    path.write_bytes(b"junk" + raw[4:])
    with pytest.raises(DataError):
        load_distances(path)


def test_cached_distances_reused(tmp_path, epistasis8):
    data, s = prepare(epistasis8)
    first = cached_pairwise_distances(data, s, tmp_path)
    assert len(list(tmp_path.iterdir())) == 1
    second = cached_pairwise_distances(data, s, tmp_path)
    np.testing.assert_array_equal(first.distances, second.distances)


matrices = st.integers(3, 9).flatmap(
    lambda n: st.lists(
        st.lists(st.one_of(st.integers(0, 2).map(float), st.just(np.nan)),
                 min_size=3, max_size=3),
        min_size=n, max_size=n,
    )
)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_distance_symmetric_nonnegative_bounded(rows):
    X = np.array(rows)
    X[:, 0] = np.where(np.isnan(X[:, 0]), 0.0, X[:, 0])  # every pair shares column 0
    data, s = _prep(X)
    dm = pairwise_distances(data, s)
    sq = dm.square()
    assert np.all(sq >= 0)
    assert np.all(sq <= data.a + 1e-12)
    np.testing.assert_array_equal(sq, sq.T)
    assert np.all(np.diag(sq) == 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([1, 2, 3, 4]))
def test_distances_identical_across_thread_counts(seed, threads):
    rng = np.random.default_rng(seed)
    X = rng.random((15, 4))
    X[rng.random(X.shape) < 0.1] = np.nan
    X[:, 0] = rng.random(15)
    data, s = _prep(X)
    ref = pairwise_distances(data, s, threads=1).distances
    np.testing.assert_array_equal(pairwise_distances(data, s, threads=threads).distances, ref)
