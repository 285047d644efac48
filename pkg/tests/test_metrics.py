"""Partition metrics against brute-force oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtdprobe.detect.metrics import (
    accuracy_permutation_oracle, adjusted_rand_index, ari_pair_counting_oracle,
    clustering_accuracy,
)

labeling = st.lists(st.integers(0, 3), min_size=2, max_size=12)


def test_identical_partitions():
    assert adjusted_rand_index([0, 0, 1, 1], [1, 1, 0, 0]) == pytest.approx(1.0)
    assert clustering_accuracy([0, 0, 1, 1], [1, 1, 0, 0]) == pytest.approx(1.0)


def test_worst_case_ari_is_minus_half():
    # Checkerboard disagreement on two balanced classes hits the lower bound.
    assert adjusted_rand_index([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5)
    assert ari_pair_counting_oracle([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5)


def test_accuracy_collapsed_prediction():
    assert clustering_accuracy([0, 0, 1, 1], [0, 0, 0, 0]) == pytest.approx(0.5)


def test_ari_matches_pair_counting_oracle_on_random_instances():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = rng.integers(2, 13)
        a = rng.integers(0, rng.integers(1, 4) + 1, size=n)
        b = rng.integers(0, rng.integers(1, 4) + 1, size=n)
        assert adjusted_rand_index(a, b) == pytest.approx(
            ari_pair_counting_oracle(a, b), abs=1e-12)


def test_accuracy_matches_permutation_oracle_on_random_instances():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = rng.integers(2, 30)
        a = rng.integers(0, 5, size=n)
        b = rng.integers(0, 5, size=n)
        assert clustering_accuracy(a, b) == pytest.approx(
            accuracy_permutation_oracle(a, b), abs=1e-12)


def test_ari_random_labelings_average_near_zero():
    rng = np.random.default_rng(3)
    vals = []
    for _ in range(1000):
        a = rng.integers(0, 2, size=50)
        b = rng.integers(0, 2, size=50)
        vals.append(adjusted_rand_index(a, b))
    assert abs(float(np.mean(vals))) < 0.05


@given(labeling, st.permutations(range(4)))
@settings(max_examples=100, deadline=None)
def test_ari_invariant_under_label_permutation(labels, perm):
    pred = [perm[v] for v in labels]
    assert adjusted_rand_index(labels, pred) == pytest.approx(1.0)
    base = adjusted_rand_index(labels, labels[::-1])
    renamed = adjusted_rand_index(labels, [perm[v] for v in labels[::-1]])
    assert renamed == pytest.approx(base, abs=1e-12)


@given(labeling, st.permutations(range(4)))
@settings(max_examples=100, deadline=None)
def test_accuracy_invariant_under_label_permutation(labels, perm):
    assert clustering_accuracy(labels, [perm[v] for v in labels]) == pytest.approx(1.0)


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        adjusted_rand_index([0, 1], [0, 1, 0])
    with pytest.raises(ValueError):
        clustering_accuracy([0, 1, 0], [0, 1])


def test_too_many_clusters_rejected():
    labels = list(range(25))
    with pytest.raises(ValueError):
        clustering_accuracy(labels, labels)
