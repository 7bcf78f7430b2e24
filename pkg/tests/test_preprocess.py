import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from icvi_artmap.core import Dataset
from icvi_artmap.preprocess import centroid_to_category, complement_code, prepare


def test_minmax_and_complement():
    prep = prepare(Dataset(np.array([[0.0], [2.0], [4.0]])))
    np.testing.assert_allclose(prep.X_a[:, 0], [0, 0.5, 1])
    np.testing.assert_allclose(prep.X_a[:, 1], [1, 0.5, 0])


def test_constant_feature():
    prep = prepare(Dataset(np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]])))
    np.testing.assert_array_equal(prep.X_a[:, 0], 0.0)
    np.testing.assert_array_equal(prep.X_a[:, 2], 1.0)
    np.testing.assert_array_equal(prep.X_b[:, 0], 0.0)


def test_complement_code_row():
    np.testing.assert_allclose(complement_code([0.2, 0.8]), [0.2, 0.8, 0.8, 0.2])


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@given(arrays(np.float64, st.tuples(st.integers(2, 20), st.integers(1, 4)), elements=finite))
def test_prepare_invariants(X):
    prep = prepare(Dataset(X))
    d = X.shape[1]
    assert np.all((prep.X_a >= 0) & (prep.X_a <= 1))
    np.testing.assert_allclose(prep.X_a[:, :d] + prep.X_a[:, d:], 1.0, atol=1e-12)
    varying = X.std(axis=0) > 1e-6 * (1 + np.abs(X).max(axis=0))
    if varying.any():
        Z = prep.X_b[:, varying]
        np.testing.assert_allclose(Z.mean(axis=0), 0.0, atol=1e-9)
        np.testing.assert_allclose(Z.var(axis=0), 1.0, atol=1e-9)
        back = prep.raw_from_std(prep.X_b)[:, varying]
        np.testing.assert_allclose(back, X[:, varying], rtol=1e-9, atol=1e-9 * np.abs(X).max())
        back = prep.raw_from_category(prep.X_a)[:, varying]
        np.testing.assert_allclose(back, X[:, varying], rtol=1e-9, atol=1e-9 * np.abs(X).max())


def test_centroid_round_trip(rng):
    X = rng.normal(size=(20, 3))
    prep = prepare(Dataset(X))
    np.testing.assert_allclose(centroid_to_category(prep.X_b[4], prep), prep.X_a[4], atol=1e-10)


def test_mean_centroid_maps_to_raw_mean(rng):
    X = rng.normal(size=(20, 3)) * [1, 5, 0.1] + [3, -2, 8]
    prep = prepare(Dataset(X))
    lo, hi = X.min(0), X.max(0)
    want = complement_code((X.mean(0) - lo) / (hi - lo))
    np.testing.assert_allclose(centroid_to_category(np.zeros(3), prep), want, rtol=1e-12)


def test_out_of_range_centroid_is_clamped():
    prep = prepare(Dataset(np.array([[0.0, 0.0], [1.0, 1.0]])))
    w = centroid_to_category(np.array([10.0, -10.0]), prep)
    np.testing.assert_array_equal(w, [1.0, 0.0, 0.0, 1.0])


def test_population_std():
    prep = prepare(Dataset(np.array([[0.0], [2.0]])))
    np.testing.assert_allclose(prep.X_b[:, 0], [-1.0, 1.0])
    assert prep.std_params[1][0] == pytest.approx(1.0)
