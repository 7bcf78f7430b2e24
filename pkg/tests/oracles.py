"""Independent reference implementations used only by the tests.

Everything here is written as plain loops over Python floats so that it
shares no code path with the vectorized package.
"""

import itertools
import math

import numpy as np


def _mean(rows):
    d = len(rows[0])
    return [sum(r[j] for r in rows) / len(rows) for j in range(d)]


def _sq(a, b):
    return sum((x - y) ** 2 for x, y in zip(a, b))


def _cov(rows, mu):
    n, d = len(rows), len(mu)
    S = [[0.0] * d for _ in range(d)]
    if n < 2:
        return S
    for r in rows:
        for a in range(d):
            for b in range(d):
                S[a][b] += (r[a] - mu[a]) * (r[b] - mu[b])
    return [[v / (n - 1) for v in row] for row in S]


def _logdet_ridge(S, delta):
    A = np.array(S) + delta * np.eye(len(S))
    sign, ld = np.linalg.slogdet(A)
    assert sign > 0
    return float(ld)


def cluster_stats(X, labels):
    """[(n, mu, CP, Sigma)] per cluster id in sorted order."""
    X = [[float(v) for v in row] for row in np.asarray(X)]
    out = []
    for c in sorted(set(int(v) for v in labels)):
        rows = [X[t] for t in range(len(X)) if labels[t] == c]
        mu = _mean(rows)
        out.append((len(rows), mu, sum(_sq(r, mu) for r in rows), _cov(rows, mu)))
    return out


def naive_index(kind, X, labels):
    X = [[float(v) for v in row] for row in np.asarray(X)]
    N, d = len(X), len(X[0])
    stats = cluster_stats(X, labels)
    k = len(stats)
    mu_data = _mean(X)
    ns = [s[0] for s in stats]
    mus = [s[1] for s in stats]
    cps = [s[2] for s in stats]
    sep = sum(n * _sq(m, mu_data) for n, m in zip(ns, mus))
    pairs = [(i, j) for i in range(k) for j in range(k) if i != j]

    if kind == "ch":
        return sep / sum(cps) * (N - k) / (k - 1)
    if kind == "wb":
        return k * sum(cps) / sep
    if kind == "db":
        total = 0.0
        for i in range(k):
            total += max((cps[i] / ns[i] + cps[j] / ns[j]) / _sq(mus[i], mus[j]) for j in range(k) if j != i)
        return total / k
    if kind == "xb":
        return sum(cps) / (N * min(_sq(mus[i], mus[j]) for i, j in pairs))
    if kind == "pbm":
        E0 = sum(_sq(x, mu_data) for x in X)
        return (E0 / sum(cps) * max(_sq(mus[i], mus[j]) for i, j in pairs) / k) ** 2
    if kind == "ni":
        delta = 10.0 ** (-12.0 / d)
        value = -0.5 * _logdet_ridge(_cov(X, mu_data), delta)
        for n, mu, _, S in stats:
            p = n / N
            value += 0.5 * p * _logdet_ridge(S, delta) - p * math.log(p)
        return value
    raise ValueError(kind)


def ari_pairs(a, b):
    """Adjusted Rand index by enumerating every sample pair."""
    n = len(a)
    both = same_a = same_b = 0
    for s, t in itertools.combinations(range(n), 2):
        ia = a[s] == a[t]
        ib = b[s] == b[t]
        same_a += ia
        same_b += ib
        both += ia and ib
    total = n * (n - 1) // 2
    if total == 0:
        return 1.0
    expected = same_a * same_b / total
    mx = (same_a + same_b) / 2
    if mx == expected:
        return 1.0
    return (both - expected) / (mx - expected)


def best_partition(X, k):
    """Minimum within-cluster scatter over all labelings into exactly k groups."""
    X = np.asarray(X, dtype=float)
    best = None
    for labels in itertools.product(range(k), repeat=len(X)):
        if len(set(labels)) != k:
            continue
        cost = sum(((X[np.array(labels) == c] - X[np.array(labels) == c].mean(0)) ** 2).sum() for c in range(k))
        if best is None or cost < best[0] - 1e-12:
            best = (cost, labels)
    return best


def merge_columns(W, i, j):
    """Map-field column merge, written row by row."""
    out = []
    for row in np.asarray(W, dtype=float).tolist():
        h = row.index(max(row))
        v = max(row[i], row[j]) if h in (i, j) else min(row[i], row[j])
        out.append([x for c, x in enumerate(row) if c not in (i, j)] + [v])
    return np.array(out)


def split_column(W, q, delta):
    W = np.asarray(W, dtype=float).tolist()
    rows = []
    for l, row in enumerate(W):
        row = list(row)
        if l == q:
            hi, lo = max(row), min(row)
            if hi == lo:
                row = [x - delta for x in row] + [hi]
            else:
                row[row.index(hi)] = lo
                row = row + [hi]
        else:
            row = row + [0.0]
        rows.append(row)
    return np.array(rows)
