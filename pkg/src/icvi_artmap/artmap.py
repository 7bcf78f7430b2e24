"""Fuzzy ARTa and the map field that links its categories to clusters.

Both modules keep their weights as dense row-per-category matrices so rows
can be appended (commit), deleted (prune) and, for the map field, columns
merged or split at the end of an epoch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ContractError(RuntimeError):
    """An operation was called outside its precondition."""


@dataclass
class ArtA:
    W: np.ndarray  # C_a x 2d
    rho: float = 0.0
    alpha: float = 0.001
    beta: float = 1.0
    instance_count: np.ndarray = field(default=None)

    def __post_init__(self):
        self.W = np.atleast_2d(np.asarray(self.W, dtype=float))
        if self.instance_count is None:
            self.instance_count = np.zeros(self.W.shape[0], dtype=np.int64)
        else:
            self.instance_count = np.asarray(self.instance_count, dtype=np.int64)

    @classmethod
    def empty(cls, dim, **params):
        return cls(np.zeros((0, dim)), **params)

    @property
    def n_categories(self) -> int:
        return self.W.shape[0]

    def activations(self, x):
        W = self.W
        return np.minimum(W, x).sum(axis=1) / (self.alpha + W.sum(axis=1))

    def match(self, x, J):
        return float(np.minimum(x, self.W[J]).sum() / np.sum(x))

    def learn(self, J, x):
        w = self.W[J]
        self.W[J] = (1.0 - self.beta) * w + self.beta * np.minimum(x, w)

    def commit(self, x):
        self.W = np.vstack([self.W, np.asarray(x, dtype=float)[None, :]])
        self.instance_count = np.append(self.instance_count, 0)
        return self.n_categories - 1

    def shrink(self, r, assigned):
        assigned = np.atleast_2d(np.asarray(assigned, dtype=float))
        if assigned.shape[0] == 0:
            raise ContractError(f"cannot shrink category {r} over an empty sample set")
        self.W[r] = assigned.min(axis=0)

    def prune(self, r):
        if self.instance_count[r] != 0:
            raise ContractError(
                f"category {r} still codes {self.instance_count[r]} samples; only empty categories are pruned"
            )
        self.W = np.delete(self.W, r, axis=0)
        self.instance_count = np.delete(self.instance_count, r)

    def to_dict(self):
        return {
            "W": self.W.tolist(),
            "dim": self.W.shape[1],
            "rho": self.rho,
            "alpha": self.alpha,
            "beta": self.beta,
            "instance_count": self.instance_count.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        W = np.array(d["W"], dtype=float).reshape(-1, d["dim"])
        return cls(W, d["rho"], d["alpha"], d["beta"], np.array(d["instance_count"], dtype=np.int64))


@dataclass
class MapField:
    W: np.ndarray  # C_a x k'
    rho: float = 0.0
    beta: float = 0.001
    epsilon: float = 0.01
    delta: float = 1e-6  # split edge case for constant rows

    def __post_init__(self):
        self.W = np.atleast_2d(np.asarray(self.W, dtype=float))

    @classmethod
    def ones(cls, n_categories, n_clusters, **params):
        return cls(np.ones((n_categories, n_clusters)), **params)

    @property
    def n_clusters(self) -> int:
        return self.W.shape[1]

    def match(self, J, y):
        y = np.asarray(y, dtype=float)
        return float(np.minimum(y, self.W[J]).sum() / y.sum())

    def learn(self, J, y):
        w = self.W[J]
        self.W[J] = (1.0 - self.beta) * w + self.beta * np.minimum(y, w)

    def commit(self):
        self.W = np.vstack([self.W, np.ones((1, self.n_clusters))])
        return self.W.shape[0] - 1

    def predict(self, J, prefer=None):
        """Cluster predicted for category J: its row argmax. Ties go to
        `prefer` when it is among the maxima, else to the lowest id."""
        row = self.W[J]
        top = row.max()
        if prefer is not None and prefer < row.size and row[prefer] == top:
            return int(prefer)
        return int(np.argmax(row))

    def prune(self, r):
        self.W = np.delete(self.W, r, axis=0)

    def delete_column(self, i):
        self.W = np.delete(self.W, i, axis=1)

    def merge_columns(self, i, j):
        """Fuse clusters i and j into a new last column; returns its id."""
        if i == j:
            raise ContractError("cannot merge a cluster with itself")
        W = self.W
        pair = W[:, [i, j]]
        owns = np.isin(np.argmax(W, axis=1), (i, j))
        v = np.where(owns, pair.max(axis=1), pair.min(axis=1))
        W = np.hstack([W, v[:, None]])
        for c in sorted((i, j), reverse=True):
            W = np.delete(W, c, axis=1)
        self.W = W
        return self.n_clusters - 1

    def split_column(self, q):
        """Give category q a cluster of its own as a new last column; returns its id."""
        row = self.W[q]
        hi, lo = row.max(), row.min()
        v = np.zeros(self.W.shape[0])
        v[q] = hi
        if hi == lo:
            self.W[q] = hi - self.delta
        else:
            self.W[q, int(np.argmax(row))] = lo
        self.W = np.hstack([self.W, v[:, None]])
        return self.n_clusters - 1

    def to_dict(self):
        return {"W": self.W.tolist(), "rho": self.rho, "beta": self.beta,
                "epsilon": self.epsilon, "delta": self.delta}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["W"], dtype=float), d["rho"], d["beta"], d["epsilon"], d["delta"])


def search_and_resonate(art: ArtA, mf: MapField, x, y):
    """Winner-take-all search with map-field match tracking.

    Returns ``(J, created)``. Learning has already been applied to J in both
    modules. The working vigilance starts at ``art.rho`` and is raised to
    ``M_J + epsilon`` on every map-field mismatch for this presentation.
    """
    rho = art.rho
    if art.n_categories:
        overlap = np.minimum(art.W, x).sum(axis=1)
        T = overlap / (art.alpha + art.W.sum(axis=1))
        matches = overlap / np.sum(x)
        for J in np.argsort(-T, kind="stable"):
            if rho > 1.0:
                break
            M = matches[J]
            if M < rho:
                continue
            if mf.match(J, y) < mf.rho:
                rho = M + mf.epsilon
                continue
            J = int(J)
            art.learn(J, x)
            mf.learn(J, y)
            return J, False
    J = art.commit(x)
    mf.commit()
    mf.learn(J, y)
    return J, True


def prune_category(art: ArtA, mf: MapField, r):
    art.prune(r)
    mf.prune(r)
