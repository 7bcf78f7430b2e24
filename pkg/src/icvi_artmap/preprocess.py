"""The two views of a dataset: complement-coded unit-box inputs for ARTa and
standardized inputs for the validity-index statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset


def complement_code(x):
    x = np.asarray(x, dtype=float)
    return np.concatenate([x, 1.0 - x], axis=-1)


@dataclass(frozen=True)
class PreparedData:
    X_a: np.ndarray  # N x 2d, complement coded
    X_b: np.ndarray  # N x d, standardized
    minmax_params: tuple  # (mins, maxs)
    std_params: tuple  # (means, stdevs)

    @property
    def N(self) -> int:
        return self.X_b.shape[0]

    @property
    def d(self) -> int:
        return self.X_b.shape[1]

    def _span(self):
        lo, hi = self.minmax_params
        span = hi - lo
        return np.where(span > 0, span, 1.0)

    def _scale(self):
        mean, std = self.std_params
        return np.where(std > 0, std, 1.0)

    def raw_from_std(self, Z):
        return np.asarray(Z, dtype=float) * self._scale() + self.std_params[0]

    def raw_from_category(self, W):
        """Inverse of the min-max step, using the first half of a complement-coded row."""
        W = np.asarray(W, dtype=float)
        return W[..., : self.d] * self._span() + self.minmax_params[0]

    def minmax(self, X_raw):
        X = (np.asarray(X_raw, dtype=float) - self.minmax_params[0]) / self._span()
        return np.clip(X, 0.0, 1.0)


def prepare(ds: Dataset) -> PreparedData:
    X = ds.X_raw
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    mean = X.mean(axis=0)
    std = X.std(axis=0)  # population denominator
    prep = PreparedData(X_a=None, X_b=None, minmax_params=(lo, hi), std_params=(mean, std))
    X_a = complement_code(prep.minmax(X))
    X_b = (X - mean) / prep._scale()
    object.__setattr__(prep, "X_a", X_a)
    object.__setattr__(prep, "X_b", X_b)
    return prep


def centroid_to_category(mu_std, prep: PreparedData):
    """Map standardized-space centroids (one per row, or a single vector)
    to complement-coded ARTa weight vectors."""
    raw = prep.raw_from_std(mu_std)
    return complement_code(prep.minmax(raw))
