import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import ari_pairs
from icvi_artmap.metrics import ari, contingency

labelings = st.integers(1, 30).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 4), min_size=n, max_size=n),
                        st.lists(st.integers(0, 4), min_size=n, max_size=n)))


def test_small_example():
    a, b = [0, 0, 1, 1], [0, 1, 0, 1]
    assert ari(a, b) == pytest.approx(ari_pairs(a, b), abs=1e-12)
    assert ari(a, b) == pytest.approx(-0.5)


def test_identity_and_permutation():
    a = np.array([3, 3, 1, 0, 1, 7])
    assert ari(a, a) == 1.0
    assert ari(a, np.array([9, 9, 2, 5, 2, 4])) == 1.0


def test_degenerate_partitions():
    assert ari([0, 0, 0], [1, 1, 1]) == 1.0
    assert ari([0, 1, 2], [5, 6, 7]) == 1.0
    assert ari([4], [2]) == 1.0


def test_length_mismatch():
    with pytest.raises(ValueError, match="length"):
        ari([0, 1], [0, 1, 1])


def test_contingency():
    np.testing.assert_array_equal(contingency([0, 0, 2], [1, 5, 5]), [[1, 1], [0, 1]])


@given(labelings)
def test_matches_pair_counting(ab):
    a, b = ab
    assert ari(a, b) == pytest.approx(ari_pairs(a, b), abs=1e-12)
    assert ari(a, b) == ari(b, a)


def test_random_labelings_average_near_zero():
    rng = np.random.default_rng(0)
    vals = [ari(rng.integers(0, 5, 200), rng.integers(0, 5, 200)) for _ in range(100)]
    assert abs(np.mean(vals)) < 0.05
