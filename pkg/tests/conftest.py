import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from icvi_artmap.core import delete_id_map, merge_id_map
from icvi_artmap.icvi import IcviState

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_partition(rng, N, k):
    """Labels 0..k-1 with every cluster non-empty."""
    labels = np.concatenate([np.arange(k), rng.integers(0, k, size=N - k)])
    return rng.permutation(labels)


def random_ops(kind, seed, N, d, k, steps, k_max=None):
    """Random move/merge/split/delete sequence; yields (state, X, labels) after each applied op."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(N, d)) * rng.uniform(0.5, 3.0, size=d)
    labels = random_partition(rng, N, k)
    s = IcviState.init_batch(kind, X, labels)
    for _ in range(steps):
        op = rng.integers(4)
        kk = s.k
        if op == 0:
            t = int(rng.integers(N))
            src, dst = int(labels[t]), int(rng.integers(kk))
            if src == dst or s.n[src] < 2:
                continue
            s.update_move(X[t], src, dst)
            labels[t] = dst
        elif op == 1 and kk > 2:
            i, j = rng.choice(kk, 2, replace=False)
            s.update_merge(int(i), int(j))
            labels = merge_id_map(kk, int(i), int(j))[labels]
        elif op == 2 and (k_max is None or kk < k_max):
            i = int(rng.integers(kk))
            idx = np.flatnonzero(labels == i)
            if idx.size < 2:
                continue
            m = rng.choice(idx, int(rng.integers(1, idx.size)), replace=False)
            s.update_split(i, X[m])
            labels[m] = kk
        elif op == 3 and kk > 2:
            # a singleton's last sample leaves, then the empty cluster is deleted
            sizes = np.bincount(labels)
            single = np.flatnonzero(sizes == 1)
            if single.size == 0:
                continue
            i = int(single[0])
            t = int(np.flatnonzero(labels == i)[0])
            dst = (i + 1) % kk
            s.update_add(dst, X[t])
            s.delete_cluster(i)
            labels[t] = dst
            labels = delete_id_map(kk, i)[labels]
        yield s, X, labels
