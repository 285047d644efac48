"""Fully-connected autoencoder with hand-derived gradients.

Architecture: input -> hidden -> latent -> hidden -> output with tanh on
every non-output layer and a linear reconstruction head. Trained with
mini-batch gradient descent plus classical momentum. Gradients are exact
(verified against central finite differences in the test suite).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ..errors import TrainingDivergedError

DIVERGENCE_FACTOR = 10.0
DIVERGENCE_PATIENCE = 50


def init_weights(layer_sizes, rng: np.random.Generator):
    """Glorot-uniform weights, zero biases."""
    weights = []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        W = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        b = np.zeros(fan_out)
        weights.append((W, b))
    return weights


def forward(weights, X):
    """All layer activations, tanh everywhere except the final layer."""
    acts = [X]
    h = X
    last = len(weights) - 1
    for i, (W, b) in enumerate(weights):
        z = h @ W + b
        h = z if i == last else np.tanh(z)
        acts.append(h)
    return acts


def reconstruction_loss(weights, X):
    out = forward(weights, X)[-1]
    return float(np.mean((out - X) ** 2))


def backward(weights, acts, X, output_grad=None, latent_grad=None):
    """Gradients of the mean-squared reconstruction loss (plus optional
    extra gradients injected at the output and/or latent layer).

    ``latent_grad``, when given, is dL_extra/d(latent activations) and is
    added at the bottleneck on the way back. Returns per-layer (dW, db).
    """
    n, d = X.shape
    last = len(weights) - 1
    latent_layer = len(weights) // 2  # index into acts
    if output_grad is None:
        output_grad = 2.0 * (acts[-1] - X) / (n * d)
    grads = [None] * len(weights)
    delta = output_grad
    for i in range(last, -1, -1):
        W, _b = weights[i]
        grads[i] = (acts[i].T @ delta, delta.sum(axis=0))
        if i > 0:
            delta = delta @ W.T
            if latent_grad is not None and i == latent_layer:
                delta = delta + latent_grad
            delta = delta * (1.0 - acts[i] ** 2)
    return grads


class Autoencoder(BaseEstimator):
    def __init__(self, hidden_dim: int = 16, latent_dim: int = 4,
                 epochs: int = 200, lr: float = 1e-3, momentum: float = 0.9,
                 batch_size: int = 64, random_state: int = 0):
        self.hidden_dim = hidden_dim
        self.latent_dim = latent_dim
        self.epochs = epochs
        self.lr = lr
        self.momentum = momentum
        self.batch_size = batch_size
        self.random_state = random_state

    # -- training ---------------------------------------------------------

    def fit(self, X: np.ndarray, y=None) -> "Autoencoder":
        X = np.asarray(X, dtype=np.float64)
        d = X.shape[1]
        rng = np.random.default_rng(self.random_state)
        self.layer_sizes_ = [d, self.hidden_dim, self.latent_dim, self.hidden_dim, d]
        self.weights_ = init_weights(self.layer_sizes_, rng)
        self.velocity_ = [(np.zeros_like(W), np.zeros_like(b))
                          for W, b in self.weights_]
        self.loss_curve_ = []
        self._train(X, self.epochs, rng)
        return self

    def _train(self, X, epochs, rng):
        """Shared mini-batch loop; also reused by joint refinement."""
        n = X.shape[0]
        for _ in range(epochs):
            order = rng.permutation(n)
            epoch_loss = 0.0
            for lo in range(0, n, self.batch_size):
                batch = X[order[lo:lo + self.batch_size]]
                acts = forward(self.weights_, batch)
                epoch_loss += float(np.sum((acts[-1] - batch) ** 2))
                grads = backward(self.weights_, acts, batch)
                self._apply(grads)
            self.loss_curve_.append(epoch_loss / (n * X.shape[1]))
            self._check_divergence()

    def _apply(self, grads):
        if self.lr == 0.0:
            return
        new_w = []
        new_v = []
        for (W, b), (vW, vb), (gW, gb) in zip(self.weights_, self.velocity_, grads):
            vW = self.momentum * vW - self.lr * gW
            vb = self.momentum * vb - self.lr * gb
            new_w.append((W + vW, b + vb))
            new_v.append((vW, vb))
        self.weights_ = new_w
        self.velocity_ = new_v

    def _check_divergence(self):
        curve = self.loss_curve_
        if len(curve) < DIVERGENCE_PATIENCE + 1:
            return
        threshold = DIVERGENCE_FACTOR * curve[0]
        if all(v > threshold for v in curve[-DIVERGENCE_PATIENCE:]):
            raise TrainingDivergedError(
                f"reconstruction loss above {DIVERGENCE_FACTOR}x its initial value "
                f"for {DIVERGENCE_PATIENCE} consecutive epochs")

    # -- inference --------------------------------------------------------

    def encode(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.layer_sizes_[0]:
            raise ValueError(f"expected {self.layer_sizes_[0]} columns, got {X.shape[1]}")
        h = X
        half = len(self.weights_) // 2
        for W, b in self.weights_[:half]:
            h = np.tanh(h @ W + b)
        return h

    def reconstruct(self, X: np.ndarray) -> np.ndarray:
        return forward(self.weights_, np.asarray(X, dtype=np.float64))[-1]

    def reconstruction_error(self, X: np.ndarray) -> float:
        return reconstruction_loss(self.weights_, np.asarray(X, dtype=np.float64))
