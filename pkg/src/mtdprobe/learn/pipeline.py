"""End-to-end unsupervised detector: constant-drop -> normalize ->
autoencoder -> k-means (-> joint refinement)."""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from ..detect.metrics import adjusted_rand_index
from ..features.extract import FeatureMatrix
from ..features.labeling import drop_constant_features
from .autoencoder import Autoencoder
from .kmeans import KMeans
from .model import DetectionModel
from .normalize import Normalizer
from .refine import refine_jointly

logger = logging.getLogger(__name__)

REFINE_GATE_SLACK = 0.02


class TriggerDetector(BaseEstimator):
    """Clusters flow features so the minority cluster isolates post-trigger
    traffic; normalization, weights, and centers persist for reuse on other
    datasets."""

    def __init__(self, hidden_dim: int = 16, latent_dim: int = 8,
                 epochs: int = 600, lr: float = 1e-3, momentum: float = 0.9,
                 batch_size: int = 64, k: int = 2, n_init: int = 10,
                 max_iter: int = 300, tol: float = 1e-6,
                 refine_epochs: int = 100, gamma: float = 1.0,
                 target_update_every: int = 10, random_state: int = 0):
        self.hidden_dim = hidden_dim
        self.latent_dim = latent_dim
        self.epochs = epochs
        self.lr = lr
        self.momentum = momentum
        self.batch_size = batch_size
        self.k = k
        self.n_init = n_init
        self.max_iter = max_iter
        self.tol = tol
        self.refine_epochs = refine_epochs
        self.gamma = gamma
        self.target_update_every = target_update_every
        self.random_state = random_state

    # ------------------------------------------------------------- training

    def fit(self, matrix: FeatureMatrix, labels: Optional[np.ndarray] = None
            ) -> "TriggerDetector":
        seq = np.random.SeedSequence(self.random_state)
        ae_seed, km_seed, refine_seed, gate_seed = [
            int(s.generate_state(1)[0]) for s in seq.spawn(4)]

        X_kept, kept_names = drop_constant_features(matrix.X, matrix.names)
        normalizer = Normalizer().fit(X_kept)
        Xn = normalizer.transform(X_kept)

        ae = Autoencoder(hidden_dim=self.hidden_dim, latent_dim=self.latent_dim,
                         epochs=self.epochs, lr=self.lr, momentum=self.momentum,
                         batch_size=self.batch_size, random_state=ae_seed).fit(Xn)
        km = KMeans(n_clusters=self.k, n_init=self.n_init, max_iter=self.max_iter,
                    tol=self.tol, random_state=km_seed).fit(ae.encode(Xn))
        centers = km.cluster_centers_
        gate_reverted = False

        if self.refine_epochs > 0:
            holdout = None
            pre_ari = None
            if labels is not None:
                rng_gate = np.random.default_rng(gate_seed)
                idx = rng_gate.permutation(Xn.shape[0])
                n_hold = max(1, Xn.shape[0] // 5)
                holdout = idx[:n_hold]
                pre_ari = self._holdout_ari(ae, centers, Xn, labels, holdout)
                snapshot = ([(W.copy(), b.copy()) for W, b in ae.weights_],
                            centers.copy())
            ae, centers, refine_history = refine_jointly(
                ae, centers, Xn, epochs=self.refine_epochs, gamma=self.gamma,
                rng=np.random.default_rng(refine_seed),
                target_update_every=self.target_update_every)
            if holdout is not None:
                post_ari = self._holdout_ari(ae, centers, Xn, labels, holdout)
                if post_ari < pre_ari - REFINE_GATE_SLACK:
                    logger.info("joint refinement degraded holdout agreement "
                                "(%.3f -> %.3f); reverting", pre_ari, post_ari)
                    ae.weights_, centers = snapshot
                    gate_reverted = True

        self.model_ = DetectionModel(
            dimension_names=kept_names,
            normalizer_mean=normalizer.mean_,
            normalizer_scale=normalizer.scale_,
            layer_sizes=list(ae.layer_sizes_),
            weights=[(W.copy(), b.copy()) for W, b in ae.weights_],
            latent_dim=self.latent_dim,
            centers=np.asarray(centers, dtype=np.float64),
            k=self.k,
            metadata={
                "epochs": self.epochs,
                "refine_epochs": self.refine_epochs,
                "gamma": self.gamma,
                "random_state": self.random_state,
                "loss_curve": [float(v) for v in ae.loss_curve_],
                "kmeans_inertia": float(km.inertia_),
                "refine_gate_reverted": gate_reverted,
            })
        return self

    @staticmethod
    def _holdout_ari(ae, centers, Xn, labels, holdout):
        z = ae.encode(Xn[holdout])
        d2 = ((z[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        return adjusted_rand_index(np.asarray(labels)[holdout], d2.argmin(axis=1))

    # ------------------------------------------------------------ inference

    @classmethod
    def from_model(cls, model: DetectionModel) -> "TriggerDetector":
        model.validate()
        detector = cls(latent_dim=model.latent_dim, k=model.k,
                       hidden_dim=model.layer_sizes[1])
        detector.model_ = model
        return detector

    def _align(self, matrix: FeatureMatrix) -> np.ndarray:
        model = self.model_
        missing = [n for n in model.dimension_names if n not in matrix.names]
        if missing:
            raise ValueError(
                f"dataset lacks dimensions required by the model: {missing}")
        cols = [matrix.names.index(n) for n in model.dimension_names]
        return matrix.X[:, cols]

    def encode(self, matrix: FeatureMatrix) -> np.ndarray:
        model = self.model_
        Xn = model.make_normalizer().transform(self._align(matrix))
        return model.make_autoencoder().encode(Xn)

    def predict(self, matrix: FeatureMatrix) -> np.ndarray:
        z = self.encode(matrix)
        centers = self.model_.centers
        d2 = ((z[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        return d2.argmin(axis=1)
