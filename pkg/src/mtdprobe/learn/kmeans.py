"""Lloyd's algorithm with k-means++ seeding and restarts."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator


def _plus_plus_seed(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total == 0.0:
            centers[j:] = X[rng.integers(n, size=k - j)]
            break
        probs = np.cumsum(d2 / total)
        centers[j] = X[np.searchsorted(probs, rng.random())]
        d2 = np.minimum(d2, np.sum((X - centers[j]) ** 2, axis=1))
    return centers


def _assign(X, centers):
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    inertia = float(d2[np.arange(X.shape[0]), labels].sum())
    return labels, inertia


def lloyd_iterations(X: np.ndarray, centers: np.ndarray, max_iter: int, tol: float):
    """Run Lloyd updates from given centers.

    Returns (centers, labels, inertia, history); history holds the inertia
    after every assignment step and is non-increasing by construction (a
    regression here means the update step is broken).
    """
    history = []
    labels, inertia = _assign(X, centers)
    history.append(inertia)
    for _ in range(max_iter):
        new_centers = centers.copy()
        for j in range(centers.shape[0]):
            members = labels == j
            if members.any():
                new_centers[j] = X[members].mean(axis=0)
            else:
                # Re-seed an emptied cluster at the point farthest from its
                # current assignment.
                d2 = ((X - new_centers[labels]) ** 2).sum(axis=1)
                new_centers[j] = X[d2.argmax()]
        new_labels, new_inertia = _assign(X, new_centers)
        if new_inertia > history[-1] + 1e-9 * max(1.0, history[-1]):
            raise AssertionError("k-means inertia increased between iterations")
        centers, labels = new_centers, new_labels
        improvement = history[-1] - new_inertia
        history.append(new_inertia)
        if improvement <= tol:
            break
    return centers, labels, history[-1], history


class KMeans(BaseEstimator):
    def __init__(self, n_clusters: int = 2, n_init: int = 10,
                 max_iter: int = 300, tol: float = 1e-6, random_state: int = 0):
        self.n_clusters = n_clusters
        self.n_init = n_init
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X: np.ndarray, y=None) -> "KMeans":
        X = np.asarray(X, dtype=np.float64)
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be >= 1")
        if X.shape[0] < self.n_clusters:
            raise ValueError(f"need >= {self.n_clusters} rows, got {X.shape[0]}")
        rng = np.random.default_rng(self.random_state)
        best = None
        for _ in range(self.n_init):
            seed_centers = _plus_plus_seed(X, self.n_clusters, rng)
            centers, labels, inertia, history = lloyd_iterations(
                X, seed_centers, self.max_iter, self.tol)
            if best is None or inertia < best[2]:
                best = (centers, labels, inertia, history)
        self.cluster_centers_, self.labels_, self.inertia_, self.inertia_history_ = best
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        labels, _ = _assign(X, self.cluster_centers_)
        return labels

    def fit_predict(self, X: np.ndarray, y=None) -> np.ndarray:
        return self.fit(X).labels_
