"""Per-dimension z-score normalization."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator


class Normalizer(BaseEstimator):
    """Column-wise z-score fit on one dataset, applied to any other.

    Population standard deviation; zero-variance columns are an error and
    must be removed upstream.
    """

    def fit(self, X: np.ndarray, y=None) -> "Normalizer":
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] < 2:
            raise ValueError("normalizer needs a 2-D array with >= 2 rows")
        self.mean_ = X.mean(axis=0)
        self.scale_ = X.std(axis=0)
        dead = np.flatnonzero(self.scale_ == 0.0)
        if dead.size:
            raise ValueError(f"zero-variance columns {dead.tolist()}; drop them first")
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.mean_.shape[0]:
            raise ValueError(f"expected {self.mean_.shape[0]} columns, got {X.shape[1]}")
        return (X - self.mean_) / self.scale_

    def fit_transform(self, X: np.ndarray, y=None) -> np.ndarray:
        return self.fit(X).transform(X)
