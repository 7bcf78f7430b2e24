import numpy as np
import pytest

from oracles import best_partition
from icvi_artmap.kmeans import best_of, kmeans_fit, kmeanspp_seed


def test_two_pairs_match_brute_force():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
    cost, labels = best_partition(X, 2)
    res = best_of(X, 2, trials=3, rng_seed=0)
    assert res.inertia == pytest.approx(cost)
    same = res.labels[:, None] == res.labels[None, :]
    want = np.array(labels)[:, None] == np.array(labels)[None, :]
    np.testing.assert_array_equal(same, want)


def test_matches_brute_force_on_small_random_sets():
    rng = np.random.default_rng(3)
    for _ in range(5):
        X = rng.normal(size=(7, 2))
        cost, _ = best_partition(X, 2)
        assert best_of(X, 2, trials=10, rng_seed=rng).inertia == pytest.approx(cost, rel=1e-9)


def test_single_cluster(rng):
    X = rng.normal(size=(15, 3))
    res = kmeans_fit(X, 1, kmeanspp_seed(X, 1, 0))
    np.testing.assert_allclose(res.centroids[0], X.mean(0))
    assert res.inertia == pytest.approx(((X - X.mean(0)) ** 2).sum())


def test_fixed_point_seeds_converge_immediately():
    X = np.array([[0.0], [1.0], [10.0], [11.0]])
    res = kmeans_fit(X, 2, np.array([[0.5], [10.5]]))
    assert res.n_iter == 1
    np.testing.assert_allclose(res.centroids, [[0.5], [10.5]])


def test_seeding(rng):
    X = rng.normal(size=(6, 2))
    S = kmeanspp_seed(X, 6, 1)
    assert sorted(map(tuple, S)) == sorted(map(tuple, X))
    assert kmeanspp_seed(X, 1, 1).shape == (1, 2)
    np.testing.assert_array_equal(kmeanspp_seed(X, 3, 9), kmeanspp_seed(X, 3, 9))
    with pytest.raises(ValueError):
        kmeanspp_seed(X, 7, 0)


def test_duplicate_points_still_give_k_clusters():
    X = np.array([[0.0, 0.0]] * 5 + [[1.0, 1.0]])
    res = best_of(X, 3, trials=2, rng_seed=0)
    assert np.bincount(res.labels, minlength=3).min() >= 1


def test_inertia_non_increasing_and_best_of_is_minimum(rng):
    X = np.vstack([rng.normal(size=(30, 2)) + c for c in ([0, 0], [3, 0], [0, 3], [3, 3])])
    res = kmeans_fit(X, 4, kmeanspp_seed(X, 4, 5))
    assert all(b <= a + 1e-9 for a, b in zip(res.history, res.history[1:]))
    assert np.bincount(res.labels, minlength=4).min() >= 1
    master = np.random.default_rng(11)
    trials = [kmeans_fit(X, 4, kmeanspp_seed(X, 4, master)).inertia for _ in range(5)]
    best = best_of(X, 4, trials=5, rng_seed=np.random.default_rng(11))
    assert best.inertia == pytest.approx(min(trials))
    one = best_of(X, 4, trials=1, rng_seed=np.random.default_rng(2))
    assert one.inertia == kmeans_fit(X, 4, kmeanspp_seed(X, 4, np.random.default_rng(2))).inertia
