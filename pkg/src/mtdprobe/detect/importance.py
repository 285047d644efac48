"""Surrogate feature ranking: bagged trees trained on the cluster labels."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.ensemble import RandomForestClassifier

N_TREES = 50
MAX_DEPTH = 8


def feature_importance(X: np.ndarray, names: Sequence[str],
                       cluster_labels: np.ndarray,
                       random_state: int = 0) -> list:
    """Impurity importances from a bagged-tree surrogate, ranked descending.

    Returns [(name, importance), ...] with importances summing to 1.
    """
    cluster_labels = np.asarray(cluster_labels)
    if np.unique(cluster_labels).size < 2:
        raise ValueError("feature importance needs at least 2 clusters present")
    forest = RandomForestClassifier(
        n_estimators=N_TREES, max_depth=MAX_DEPTH, max_features=0.5,
        bootstrap=True, random_state=random_state)
    forest.fit(X, cluster_labels)
    imp = forest.feature_importances_
    total = imp.sum()
    if total > 0:
        imp = imp / total
    order = np.argsort(-imp, kind="stable")
    return [(names[i], float(imp[i])) for i in order]
