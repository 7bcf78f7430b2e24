"""Incremental cluster validity indices over crisp partitions.

Per-cluster statistics (frequency, mean, compactness and, for the negentropy
increment, covariance) are kept up to date under five kinds of change: adding
a sample, removing a sample, merging two clusters, splitting a cluster and
doing nothing. The index value is then rebuilt from these cached terms in
O(k^2) instead of O(N).

Supported indices, by short name:

    ch   Calinski-Harabasz            max-optimal
    wb   WB-index                     min-optimal
    db   Davies-Bouldin               min-optimal
    xb   Xie-Beni                     min-optimal
    pbm  Pakhira-Bandyopadhyay-Maulik max-optimal
    ni   negentropy increment         min-optimal

`batch_value` recomputes any index from a label vector with no caching; it
is both the test oracle for the incremental path and the cost model of the
batch-CVI twin.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

KINDS = ("ch", "wb", "db", "xb", "pbm", "ni")
MAX_OPTIMAL = frozenset({"ch", "pbm"})
PAIRWISE = frozenset({"db", "xb", "pbm"})
MIN_CLUSTERS = {"ch": 2, "wb": 1, "db": 2, "xb": 2, "pbm": 2, "ni": 1}
TINY = 1e-30


def normalize_kind(kind) -> str:
    s = str(kind).strip().lower()
    if s in KINDS:
        return s
    if s.startswith("i") and s[1:] in KINDS:
        return s[1:]
    raise ValueError(f"unknown validity index {kind!r}; valid kinds: {', '.join(KINDS)}")


def is_max_optimal(kind) -> bool:
    return normalize_kind(kind) in MAX_OPTIMAL


def worst_value(kind) -> float:
    return -np.inf if is_max_optimal(kind) else np.inf


def regularizer(d) -> float:
    """Ridge added to every covariance before taking its log-determinant."""
    return 10.0 ** (-12.0 / d)


def logdet_reg(S, delta):
    """log|S + delta*I| for one matrix or a stack, via Cholesky."""
    S = np.asarray(S, dtype=float)
    A = S + delta * np.eye(S.shape[-1])
    try:
        L = np.linalg.cholesky(A)
        return 2.0 * np.log(np.diagonal(L, axis1=-2, axis2=-1)).sum(axis=-1)
    except np.linalg.LinAlgError:
        sign, ld = np.linalg.slogdet(A)
        return np.where(sign > 0, ld, -np.inf)


def _sqdist(A, B):
    """Pairwise squared Euclidean distances between rows of A and B."""
    diff = A[..., :, None, :] - B[..., None, :, :]
    return np.einsum("...ijk,...ijk->...ij", diff, diff)


# ---------------------------------------------------------------------------
# Five-case recursions. `sigma` may be None when covariances are not tracked.


def add_stats(n, mu, cp, sigma, x):
    """Add sample x. Broadcasts over a leading axis of clusters."""
    n = np.asarray(n, dtype=float)
    n1 = n + 1.0
    diff = x - mu
    mu1 = (n / n1)[..., None] * mu + x / n1[..., None]
    cp1 = cp + (n / n1) * np.einsum("...i,...i->...", diff, diff)
    sigma1 = None
    if sigma is not None:
        outer = diff[..., :, None] * diff[..., None, :]
        sigma1 = ((n - 1.0) / n)[..., None, None] * sigma + (1.0 / n1)[..., None, None] * outer
    return n1, mu1, cp1, sigma1


def remove_stats(n, mu, cp, sigma, x):
    """Remove sample x from a cluster holding at least two samples."""
    n = float(n)
    if n < 2:
        raise ValueError("removing the last sample of a cluster is a cluster deletion")
    n1 = n - 1.0
    diff = x - mu
    mu1 = (n / n1) * mu - x / n1
    cp1 = max(cp - (n / n1) * float(diff @ diff), 0.0)
    sigma1 = None
    if sigma is not None:
        if n1 < 2:
            sigma1 = np.zeros_like(sigma)
        else:
            sigma1 = ((n - 1.0) / (n - 2.0)) * sigma - (n / ((n - 1.0) * (n - 2.0))) * np.outer(diff, diff)
    return n1, mu1, cp1, sigma1


def merge_stats(ni, mui, cpi, si, nj, muj, cpj, sj):
    ni, nj = float(ni), float(nj)
    n = ni + nj
    diff = muj - mui
    mu = (ni / n) * mui + (nj / n) * muj
    cp = cpi + cpj + (ni * nj / n) * float(diff @ diff)
    sigma = None
    if si is not None:
        sigma = ((ni - 1.0) / (n - 1.0)) * si + ((nj - 1.0) / (n - 1.0)) * sj \
            + (ni * nj / (n * (n - 1.0))) * np.outer(diff, diff)
    return n, mu, cp, sigma


def split_stats(ni, mui, cpi, si, nj, muj, cpj, sj):
    """Stats of cluster i after the sub-cluster j (given by its own stats) leaves."""
    ni, nj = float(ni), float(nj)
    n = ni - nj
    if n < 1:
        raise ValueError("a split must leave at least one sample behind")
    diff = muj - mui
    mu = (ni / n) * mui - (nj / n) * muj
    cp = max(cpi - cpj - (ni * nj / n) * float(diff @ diff), 0.0)
    sigma = None
    if si is not None:
        if n < 2:
            sigma = np.zeros_like(si)
        else:
            sigma = ((ni - 1.0) / (n - 1.0)) * si - ((nj - 1.0) / (n - 1.0)) * sj \
                - (ni * nj / (n * (n - 1.0))) * np.outer(diff, diff)
    return n, mu, cp, sigma


def batch_cluster_stats(X, with_sigma=False):
    """(n, mu, CP, Sigma) of one sample block; Sigma of a singleton is zero."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    mu = X.mean(axis=0)
    R = X - mu
    cp = float(np.einsum("ij,ij->", R, R))
    sigma = None
    if with_sigma:
        sigma = R.T @ R / (n - 1) if n > 1 else np.zeros((X.shape[1], X.shape[1]))
    return float(n), mu, cp, sigma


# ---------------------------------------------------------------------------
# Index formulas over cached terms. Every array carries a leading batch axis
# so the same code scores many hypothetical partitions at once.


def index_values(kind, N, n, cp, sep, logdet=None, dist2=None, E0=None, logdet_data=None):
    n = np.atleast_2d(n)
    cp = np.atleast_2d(cp)
    sep = np.atleast_2d(sep)
    k = n.shape[-1]
    if k < MIN_CLUSTERS[kind]:
        raise ValueError(f"{kind} needs at least {MIN_CLUSTERS[kind]} clusters, got {k}")
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == "ch":
            den = cp.sum(-1)
            val = sep.sum(-1) / den * (N - k) / (k - 1)
            return np.where(den < TINY, np.inf, val)
        if kind == "wb":
            den = sep.sum(-1)
            return np.where(den < TINY, np.inf, k * cp.sum(-1) / den)
        if kind == "ni":
            p = n / N
            ld = np.atleast_2d(logdet)
            return 0.5 * (p * ld).sum(-1) - (p * np.log(p)).sum(-1) - 0.5 * logdet_data
        D = np.array(dist2, dtype=float, ndmin=3)
        eye = np.eye(k, dtype=bool)
        off = np.where(eye, np.inf, D)
        degenerate = (off < TINY).any(axis=(-2, -1))
        if kind == "xb":
            val = cp.sum(-1) / (N * off.min(axis=(-2, -1)))
            return np.where(degenerate, np.inf, val)
        if kind == "db":
            S = cp / n
            R = (S[..., :, None] + S[..., None, :]) / off
            val = R.max(axis=-1).mean(axis=-1)
            return np.where(degenerate, np.inf, val)
        if kind == "pbm":
            den = cp.sum(-1)
            val = (E0 / den * np.where(eye, 0.0, D).max(axis=(-2, -1)) / k) ** 2
            return np.where(den < TINY, np.inf, val)
    raise ValueError(kind)


# ---------------------------------------------------------------------------


@dataclass
class ClusterStats:
    n: float
    mu: np.ndarray
    CP: float
    Sigma: np.ndarray | None
    sep: float


@dataclass
class GlobalStats:
    N: int
    mu_data: np.ndarray
    E0: float
    logdet_Sigma_data: float
    delta: float
    dist2: np.ndarray


def _global_stats(X, with_cov):
    N, d = X.shape
    mu = X.mean(axis=0)
    R = X - mu
    E0 = float(np.einsum("ij,ij->", R, R))
    delta = regularizer(d)
    ld = float(logdet_reg(R.T @ R / (N - 1), delta)) if with_cov and N > 1 else 0.0
    return mu, E0, ld, delta


def _check_labels(labels, N):
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if labels.shape[0] != N:
        raise ValueError(f"{labels.shape[0]} labels for {N} samples")
    if labels.min() < 0:
        raise ValueError("cluster ids must be non-negative")
    counts = np.bincount(labels)
    if (counts == 0).any():
        raise ValueError(f"empty cluster id(s) {np.flatnonzero(counts == 0).tolist()} in labels")
    return labels, counts


def _per_cluster(X, labels, k, with_sigma):
    N, d = X.shape
    onehot = np.zeros((k, N))
    onehot[labels, np.arange(N)] = 1.0
    n = onehot.sum(axis=1)
    mu = (onehot @ X) / n[:, None]
    R = X - mu[labels]
    cp = np.bincount(labels, weights=np.einsum("ij,ij->i", R, R), minlength=k)
    sigma = None
    if with_sigma:
        sigma = np.zeros((k, d, d))
        order = np.argsort(labels, kind="stable")
        bounds = np.concatenate([[0], np.cumsum(n.astype(np.int64))])
        Rs = R[order]
        for i in range(k):
            if n[i] > 1:
                block = Rs[bounds[i]:bounds[i + 1]]
                sigma[i] = block.T @ block / (n[i] - 1)
    return n, mu, cp, sigma


def batch_value(kind, X, labels) -> float:
    """Index value of a dense labelling, recomputed from scratch."""
    kind = normalize_kind(kind)
    X = np.asarray(X, dtype=float)
    labels, counts = _check_labels(labels, X.shape[0])
    k = counts.size
    with_cov = kind == "ni"
    n, mu, cp, sigma = _per_cluster(X, labels, k, with_cov)
    mu_data, E0, ld_data, delta = _global_stats(X, with_cov)
    sep = n * ((mu - mu_data) ** 2).sum(axis=1)
    logdet = logdet_reg(sigma, delta) if with_cov else None
    dist2 = _sqdist(mu, mu) if kind in PAIRWISE else None
    N = X.shape[0]
    return float(index_values(kind, N, n, cp, sep, logdet, dist2, E0, ld_data)[0])


class IcviState:
    """Cached statistics of one partition plus its current index value.

    Cluster ids are dense. Merges and splits append the resulting cluster as
    the last id, mirroring the map-field column surgery.
    """

    def __init__(self, kind, n, mu, cp, sigma, glob: GlobalStats):
        self.kind = normalize_kind(kind)
        self.n = np.asarray(n, dtype=float)
        self.mu = np.asarray(mu, dtype=float)
        self.CP = np.asarray(cp, dtype=float)
        self.Sigma = sigma
        self.globals = glob
        self.logdet = logdet_reg(sigma, glob.delta) if sigma is not None else None
        self.sep = self._sep(self.n, self.mu)
        self.value = self.evaluate()

    @classmethod
    def init_batch(cls, kind, X, labels):
        kind = normalize_kind(kind)
        X = np.asarray(X, dtype=float)
        labels, counts = _check_labels(labels, X.shape[0])
        k = counts.size
        with_cov = kind == "ni"
        n, mu, cp, sigma = _per_cluster(X, labels, k, with_cov)
        mu_data, E0, ld_data, delta = _global_stats(X, with_cov)
        glob = GlobalStats(N=X.shape[0], mu_data=mu_data, E0=E0, logdet_Sigma_data=ld_data,
                           delta=delta, dist2=_sqdist(mu, mu))
        return cls(kind, n, mu, cp, sigma, glob)

    # -- bookkeeping -------------------------------------------------------

    @property
    def k(self) -> int:
        return self.n.shape[0]

    @property
    def optimality(self) -> str:
        return "max" if self.kind in MAX_OPTIMAL else "min"

    @property
    def clusters(self):
        return [self.cluster(i) for i in range(self.k)]

    def cluster(self, i) -> ClusterStats:
        return ClusterStats(
            n=float(self.n[i]), mu=self.mu[i].copy(), CP=float(self.CP[i]),
            Sigma=None if self.Sigma is None else self.Sigma[i].copy(), sep=float(self.sep[i]),
        )

    def copy(self):
        return copy.deepcopy(self)

    def _sep(self, n, mu):
        diff = mu - self.globals.mu_data
        return n * np.einsum("...i,...i->...", diff, diff)

    def _logdet(self, sigma):
        return logdet_reg(sigma, self.globals.delta)

    def _values(self, n, cp, sep, logdet, dist2):
        g = self.globals
        return index_values(self.kind, g.N, n, cp, sep, logdet, dist2, g.E0, g.logdet_Sigma_data)

    def evaluate(self) -> float:
        return float(self._values(self.n, self.CP, self.sep, self.logdet, self.globals.dist2)[0])

    def _check(self, i):
        if not 0 <= i < self.k:
            raise IndexError(f"cluster {i} does not exist (k={self.k})")

    def _set(self, i, n, mu, cp, sigma):
        self.n[i] = n
        self.mu[i] = mu
        self.CP[i] = cp
        self.sep[i] = self._sep(n, mu)
        if self.Sigma is not None:
            self.Sigma[i] = sigma
            self.logdet[i] = self._logdet(sigma)
        row = ((self.mu - mu) ** 2).sum(axis=1)
        row[i] = 0.0
        D = self.globals.dist2
        D[i, :] = row
        D[:, i] = row

    def _append(self, n, mu, cp, sigma):
        self.n = np.append(self.n, n)
        self.mu = np.vstack([self.mu, mu[None, :]])
        self.CP = np.append(self.CP, cp)
        self.sep = np.append(self.sep, self._sep(n, mu))
        if self.Sigma is not None:
            self.Sigma = np.concatenate([self.Sigma, sigma[None]], axis=0)
            self.logdet = np.append(self.logdet, self._logdet(sigma))
        row = ((self.mu - mu) ** 2).sum(axis=1)
        row[-1] = 0.0
        D = self.globals.dist2
        D = np.pad(D, ((0, 1), (0, 1)))
        D[-1, :] = row
        D[:, -1] = row
        self.globals.dist2 = D
        return self.k - 1

    def _drop(self, i):
        self.n = np.delete(self.n, i)
        self.mu = np.delete(self.mu, i, axis=0)
        self.CP = np.delete(self.CP, i)
        self.sep = np.delete(self.sep, i)
        if self.Sigma is not None:
            self.Sigma = np.delete(self.Sigma, i, axis=0)
            self.logdet = np.delete(self.logdet, i)
        D = np.delete(self.globals.dist2, i, axis=0)
        self.globals.dist2 = np.delete(D, i, axis=1)

    def _stats(self, i):
        return self.n[i], self.mu[i], self.CP[i], None if self.Sigma is None else self.Sigma[i]

    # -- committed updates -------------------------------------------------

    def update_add(self, i, x):
        self._check(i)
        self._set(i, *add_stats(*self._stats(i), x))
        self.value = self.evaluate()

    def update_remove(self, i, x):
        self._check(i)
        self._set(i, *remove_stats(*self._stats(i), x))
        self.value = self.evaluate()

    def update_move(self, x, src, dst):
        """Remove x from src and add it to dst (one committed swap)."""
        self._check(src)
        self._check(dst)
        if src == dst:
            return
        self._set(src, *remove_stats(*self._stats(src), x))
        self._set(dst, *add_stats(*self._stats(dst), x))
        self.value = self.evaluate()

    def update_merge(self, i, j) -> int:
        """Merge clusters i and j; the result becomes the last cluster id."""
        self._check(i)
        self._check(j)
        if i == j:
            raise ValueError("cannot merge a cluster with itself")
        merged = merge_stats(*self._stats(i), *self._stats(j))
        for c in sorted((i, j), reverse=True):
            self._drop(c)
        new = self._append(*merged)
        self.value = self.evaluate()
        return new

    def update_split(self, i, X_members) -> int:
        """Move the given member samples of cluster i into a new last cluster."""
        self._check(i)
        X_members = np.atleast_2d(np.asarray(X_members, dtype=float))
        m = X_members.shape[0]
        if m < 1 or m >= self.n[i]:
            raise ValueError(f"split of cluster {i} (n={self.n[i]:g}) needs 1..n-1 members, got {m}")
        sub = batch_cluster_stats(X_members, self.Sigma is not None)
        self._set(i, *split_stats(*self._stats(i), *sub))
        new = self._append(*sub)
        self.value = self.evaluate()
        return new

    def delete_cluster(self, i):
        self._check(i)
        if self.k <= 1:
            raise ValueError("cannot delete the only cluster")
        self._drop(i)
        self.value = self.evaluate()

    # -- hypothetical scores (no mutation) --------------------------------

    def _swap_scores(self, x, src, targets):
        k = self.k
        targets = np.asarray(targets, dtype=np.int64)
        B = targets.size
        rows = np.arange(B)
        n_r, mu_r, cp_r, s_r = remove_stats(*self._stats(src), x)
        sig = None if self.Sigma is None else self.Sigma[targets]
        n_a, mu_a, cp_a, s_a = add_stats(self.n[targets], self.mu[targets], self.CP[targets], sig, x)

        def cand(base, removed, added):
            out = np.repeat(base[None, :], B, axis=0)
            out[:, src] = removed
            out[rows, targets] = added
            return out

        n = cand(self.n, n_r, n_a)
        cp = cand(self.CP, cp_r, cp_a)
        sep = cand(self.sep, self._sep(n_r, mu_r), self._sep(n_a, mu_a))
        logdet = None
        if self.Sigma is not None:
            logdet = cand(self.logdet, self._logdet(s_r), self._logdet(s_a))
        dist2 = None
        if self.kind in PAIRWISE:
            mu1 = self.mu.copy()
            mu1[src] = mu_r
            D1 = self.globals.dist2.copy()
            row = ((mu1 - mu_r) ** 2).sum(axis=1)
            row[src] = 0.0
            D1[src, :] = row
            D1[:, src] = row
            new = _sqdist(mu_a, mu1)
            new[rows, targets] = 0.0
            dist2 = np.repeat(D1[None], B, axis=0)
            dist2[rows, targets, :] = new
            dist2[rows, :, targets] = new
        return self._values(n, cp, sep, logdet, dist2)

    def score_swap_all(self, x, src):
        """Index value for moving x from src to each cluster (src -> current value).

        Moving the only sample out of a singleton scores as the worst value.
        """
        self._check(src)
        scores = np.full(self.k, worst_value(self.kind))
        scores[src] = self.value
        if self.n[src] < 2:
            return scores
        targets = np.flatnonzero(np.arange(self.k) != src)
        if targets.size:
            scores[targets] = self._swap_scores(x, src, targets)
        return scores

    def score_swap(self, x, src, dst) -> float:
        self._check(src)
        self._check(dst)
        if src == dst:
            return self.value
        if self.n[src] < 2:
            return worst_value(self.kind)
        return float(self._swap_scores(x, src, [dst])[0])

    def score_merge(self, i, j) -> float:
        self._check(i)
        self._check(j)
        if i == j:
            raise ValueError("cannot merge a cluster with itself")
        n_m, mu_m, cp_m, s_m = merge_stats(*self._stats(i), *self._stats(j))
        keep = np.flatnonzero((np.arange(self.k) != i) & (np.arange(self.k) != j))
        n = np.append(self.n[keep], n_m)
        cp = np.append(self.CP[keep], cp_m)
        sep = np.append(self.sep[keep], self._sep(n_m, mu_m))
        logdet = None
        if self.Sigma is not None:
            logdet = np.append(self.logdet[keep], self._logdet(s_m))
        dist2 = None
        if self.kind in PAIRWISE:
            row = ((self.mu[keep] - mu_m) ** 2).sum(axis=1)
            dist2 = np.pad(self.globals.dist2[np.ix_(keep, keep)], ((0, 1), (0, 1)))
            dist2[-1, :-1] = row
            dist2[:-1, -1] = row
        return float(self._values(n, cp, sep, logdet, dist2)[0])

    def score_split(self, i, X_members) -> float:
        self._check(i)
        X_members = np.atleast_2d(np.asarray(X_members, dtype=float))
        m = X_members.shape[0]
        if m < 1 or m >= self.n[i]:
            raise ValueError(f"split of cluster {i} (n={self.n[i]:g}) needs 1..n-1 members, got {m}")
        n_j, mu_j, cp_j, s_j = batch_cluster_stats(X_members, self.Sigma is not None)
        n_i, mu_i, cp_i, s_i = split_stats(*self._stats(i), n_j, mu_j, cp_j, s_j)
        n = np.append(self.n, n_j)
        n[i] = n_i
        cp = np.append(self.CP, cp_j)
        cp[i] = cp_i
        sep = np.append(self.sep, self._sep(n_j, mu_j))
        sep[i] = self._sep(n_i, mu_i)
        logdet = None
        if self.Sigma is not None:
            logdet = np.append(self.logdet, self._logdet(s_j))
            logdet[i] = self._logdet(s_i)
        dist2 = None
        if self.kind in PAIRWISE:
            mu = np.vstack([self.mu, mu_j[None, :]])
            mu[i] = mu_i
            dist2 = np.pad(self.globals.dist2, ((0, 1), (0, 1)))
            for c in (i, self.k):
                row = ((mu - mu[c]) ** 2).sum(axis=1)
                row[c] = 0.0
                dist2[c, :] = row
                dist2[:, c] = row
        return float(self._values(n, cp, sep, logdet, dist2)[0])
