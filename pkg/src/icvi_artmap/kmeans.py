"""Lloyd's k-means with k-means++ seeding (prototype initialization and baseline)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class KMeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    inertia: float
    n_iter: int
    history: list = field(default_factory=list)  # inertia after each assignment step


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _sqdist(X, C):
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def kmeanspp_seed(X, k, rng_seed=None):
    """D^2 sampling: first centre uniform, each next one proportional to the
    squared distance to the nearest centre already chosen."""
    X = np.asarray(X, dtype=float)
    N = X.shape[0]
    if not 1 <= k <= N:
        raise ValueError(f"k must be in 1..{N}, got {k}")
    rng = _rng(rng_seed)
    chosen = [int(rng.integers(N))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(N, p=d2 / total))
        else:
            # only duplicates of chosen points remain
            free = np.setdiff1d(np.arange(N), chosen)
            idx = int(rng.choice(free))
        chosen.append(idx)
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return X[chosen].copy()


def _assign(X, C):
    D = _sqdist(X, C)
    labels = D.argmin(axis=1)
    return labels, D[np.arange(X.shape[0]), labels]


def _repair_empty(X, C, labels, d2):
    """Give each empty cluster the point farthest from its own centroid."""
    k = C.shape[0]
    counts = np.bincount(labels, minlength=k)
    for c in np.flatnonzero(counts == 0):
        movable = counts[labels] > 1
        if not movable.any():
            break
        far = int(np.argmax(np.where(movable, d2, -1.0)))
        counts[labels[far]] -= 1
        counts[c] += 1
        labels[far] = c
        C[c] = X[far]
        d2[far] = 0.0
    return labels, d2


def kmeans_fit(X, k, seeds, max_iter=300, tol=1e-6) -> KMeansResult:
    X = np.asarray(X, dtype=float)
    C = np.array(seeds, dtype=float, copy=True)
    history = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        labels, d2 = _assign(X, C)
        labels, d2 = _repair_empty(X, C, labels, d2)
        history.append(float(d2.sum()))
        new = np.vstack([X[labels == c].mean(axis=0) for c in range(k)])
        shift = float(((new - C) ** 2).sum())
        C = new
        if shift <= tol:
            break
    labels, d2 = _assign(X, C)
    labels, d2 = _repair_empty(X, C, labels, d2)
    return KMeansResult(C, labels, float(d2.sum()), n_iter, history)


def best_of(X, k, trials=10, rng_seed=None, max_iter=300, tol=1e-6) -> KMeansResult:
    """Best of `trials` seeded runs by inertia; ties keep the earliest trial."""
    rng = _rng(rng_seed)
    best = None
    for _ in range(trials):
        res = kmeans_fit(X, k, kmeanspp_seed(X, k, rng), max_iter=max_iter, tol=tol)
        if best is None or res.inertia < best.inertia:
            best = res
    return best
