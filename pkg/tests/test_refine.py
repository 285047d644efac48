"""Joint autoencoder + centroid refinement."""

import numpy as np
import pytest

from mtdprobe.learn.autoencoder import Autoencoder
from mtdprobe.learn.kmeans import KMeans
from mtdprobe.learn.refine import (
    _cluster_grads, assignment_entropy, refine_jointly, soft_assignments,
    target_distribution,
)


def _setup(seed=0, n=60):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(-2, 0.3, size=(n, 6)), rng.normal(2, 0.3, size=(n, 6))])
    ae = Autoencoder(hidden_dim=8, latent_dim=2, epochs=150, random_state=seed).fit(X)
    km = KMeans(n_clusters=2, random_state=seed).fit(ae.encode(X))
    return X, ae, km


def test_soft_assignments_are_distributions():
    rng = np.random.default_rng(1)
    q = soft_assignments(rng.normal(size=(20, 3)), rng.normal(size=(4, 3)))
    np.testing.assert_allclose(q.sum(axis=1), 1.0)
    assert (q > 0).all()


def test_target_distribution_sharpens():
    rng = np.random.default_rng(2)
    q = soft_assignments(rng.normal(size=(50, 2)), rng.normal(size=(2, 2)))
    p = target_distribution(q)
    np.testing.assert_allclose(p.sum(axis=1), 1.0)
    assert assignment_entropy(p) <= assignment_entropy(q) + 1e-9


def test_cluster_gradients_match_finite_differences():
    rng = np.random.default_rng(3)
    Z = rng.normal(size=(12, 3))
    C = rng.normal(size=(2, 3))
    q = soft_assignments(Z, C)
    p = target_distribution(q)

    def loss(z, c):
        qq = np.clip(soft_assignments(z, c), 1e-12, 1.0)
        return float((p * np.log(np.clip(p, 1e-12, 1.0) / qq)).sum()) / z.shape[0]

    dZ, dC = _cluster_grads(Z, C, p, q)
    h = 1e-6
    for arr, grad in ((Z, dZ), (C, dC)):
        num = np.empty_like(arr)
        for idx in np.ndindex(arr.shape):
            up = arr.copy(); up[idx] += h
            dn = arr.copy(); dn[idx] -= h
            if arr is Z:
                num[idx] = (loss(up, C) - loss(dn, C)) / (2 * h)
            else:
                num[idx] = (loss(Z, up) - loss(Z, dn)) / (2 * h)
        rel = np.abs(grad - num) / np.maximum(1e-8, np.abs(grad) + np.abs(num))
        assert rel.max() < 1e-4


def test_zero_epochs_is_identity():
    X, ae, km = _setup()
    before = [(W.copy(), b.copy()) for W, b in ae.weights_]
    ae2, centers, _ = refine_jointly(ae, km.cluster_centers_, X, epochs=0,
                                     gamma=1.0, rng=np.random.default_rng(0))
    for (W1, b1), (W0, b0) in zip(ae2.weights_, before):
        np.testing.assert_array_equal(W1, W0)
    np.testing.assert_array_equal(centers, km.cluster_centers_)


def test_gamma_zero_equals_continued_training():
    X, ae_a, km = _setup(seed=4)
    ae_b = Autoencoder(hidden_dim=8, latent_dim=2, epochs=150, random_state=4).fit(X)
    refined, centers, _ = refine_jointly(ae_a, km.cluster_centers_, X, epochs=20,
                                         gamma=0.0, rng=np.random.default_rng(9))
    ae_b._train(X, 20, np.random.default_rng(9))
    for (W1, _), (W2, _) in zip(refined.weights_, ae_b.weights_):
        np.testing.assert_array_equal(W1, W2)
    np.testing.assert_array_equal(centers, km.cluster_centers_)


def test_soft_entropy_decreases_on_two_clouds():
    X, ae, km = _setup(seed=5)
    _, _, hist = refine_jointly(ae, km.cluster_centers_, X, epochs=60, gamma=1.0,
                                rng=np.random.default_rng(5))
    assert hist.soft_entropy[-1] < hist.soft_entropy[0]
