"""Lloyd's algorithm behavior and the restart oracle."""

import numpy as np
import pytest

from mtdprobe.learn.kmeans import KMeans, _assign, lloyd_iterations


def two_clouds(rng, n=100, spread=0.1):
    a = rng.normal(0, spread, size=(n, 2))
    b = rng.normal(10, spread, size=(n, 2))
    return np.vstack([a, b])


def test_single_cluster_is_mean():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 3))
    km = KMeans(n_clusters=1, random_state=0).fit(X)
    np.testing.assert_allclose(km.cluster_centers_[0], X.mean(axis=0))


def test_well_separated_clouds_split_perfectly():
    rng = np.random.default_rng(1)
    X = two_clouds(rng)
    km = KMeans(n_clusters=2, random_state=1).fit(X)
    labels = km.labels_
    assert len(set(labels[:100])) == 1
    assert len(set(labels[100:])) == 1
    assert labels[0] != labels[150]


def test_inertia_history_non_increasing():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(300, 4))
    km = KMeans(n_clusters=3, random_state=2).fit(X)
    hist = np.asarray(km.inertia_history_)
    assert np.all(np.diff(hist) <= 1e-9)


def test_converged_inertia_beats_random_centroids():
    # Oracle: no random centroid pair should do better than the fit.
    rng = np.random.default_rng(3)
    X = np.vstack([rng.normal(0, 1, size=(80, 3)), rng.normal(4, 1, size=(80, 3))])
    km = KMeans(n_clusters=2, random_state=3).fit(X)
    worst = np.inf
    for _ in range(100):
        centers = X[rng.choice(len(X), 2, replace=False)]
        _, inertia = _assign(X, centers)
        worst = min(worst, inertia)
    assert km.inertia_ <= worst + 1e-9


def test_empty_cluster_reseeded_at_farthest_point():
    # Two identical far centers force one to empty; it must jump away.
    X = np.array([[0.0, 0.0], [0.1, 0.0], [10.0, 0.0]])
    centers = np.array([[20.0, 0.0], [30.0, 0.0]])
    out_centers, labels, inertia, hist = lloyd_iterations(X, centers, 10, 0.0)
    assert len(set(labels.tolist())) == 2
    assert np.all(np.diff(hist) <= 1e-9)


def test_predict_matches_fit_labels():
    rng = np.random.default_rng(4)
    X = two_clouds(rng, n=50)
    km = KMeans(n_clusters=2, random_state=4).fit(X)
    np.testing.assert_array_equal(km.predict(X), km.labels_)


def test_requires_enough_rows():
    with pytest.raises(ValueError):
        KMeans(n_clusters=5).fit(np.zeros((3, 2)))


def test_deterministic_given_seed():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(120, 3))
    a = KMeans(n_clusters=4, random_state=7).fit(X)
    b = KMeans(n_clusters=4, random_state=7).fit(X)
    np.testing.assert_array_equal(a.cluster_centers_, b.cluster_centers_)
