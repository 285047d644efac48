"""Joint refinement of the autoencoder and the cluster centers.

The clustering loss is the KL divergence between Student-t soft assignments
of latent points to centers and a sharpened target distribution; it is
weighted by ``gamma`` and added to the reconstruction loss, with gradients
flowing into both the encoder and the centers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autoencoder import Autoencoder, backward, forward


def soft_assignments(Z: np.ndarray, centers: np.ndarray, alpha: float = 1.0) -> np.ndarray:
    """Student-t kernel similarity, rows normalized to distributions."""
    d2 = ((Z[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    q = (1.0 + d2 / alpha) ** (-(alpha + 1.0) / 2.0)
    return q / q.sum(axis=1, keepdims=True)


def target_distribution(q: np.ndarray) -> np.ndarray:
    """Sharpen soft assignments: square and renormalize by cluster mass."""
    weight = q ** 2 / q.sum(axis=0)
    return weight / weight.sum(axis=1, keepdims=True)


def assignment_entropy(q: np.ndarray) -> float:
    """Mean per-row entropy of the soft assignments, in bits."""
    q = np.clip(q, 1e-12, 1.0)
    return float(-(q * np.log2(q)).sum(axis=1).mean())


def _cluster_grads(Z, centers, p, q, alpha=1.0):
    """Gradients of KL(P || Q)/n w.r.t. latent points and centers."""
    n = Z.shape[0]
    kernel = (1.0 + ((Z[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2) / alpha) ** -1
    coeff = ((alpha + 1.0) / alpha) * (p - q) * kernel / n
    diff = Z[:, None, :] - centers[None, :, :]
    dZ = (coeff[:, :, None] * diff).sum(axis=1)
    dC = -(coeff[:, :, None] * diff).sum(axis=0)
    return dZ, dC


@dataclass
class RefineHistory:
    recon_loss: list = field(default_factory=list)
    cluster_loss: list = field(default_factory=list)
    soft_entropy: list = field(default_factory=list)


def refine_jointly(ae: Autoencoder, centers: np.ndarray, X: np.ndarray,
                   epochs: int, gamma: float, rng: np.random.Generator,
                   target_update_every: int = 10) -> tuple:
    """Continue training with combined loss; returns (ae, centers, history).

    With ``gamma == 0`` this reduces exactly to more reconstruction epochs.
    ``epochs == 0`` is the identity. The autoencoder is updated in place
    through its own mini-batch machinery so batching and momentum match
    plain training.
    """
    X = np.asarray(X, dtype=np.float64)
    centers = np.array(centers, dtype=np.float64, copy=True)
    history = RefineHistory()
    n, d = X.shape
    latent_half = len(ae.weights_) // 2
    p_full = None
    for epoch in range(epochs):
        if gamma != 0.0 and epoch % target_update_every == 0:
            q_full = soft_assignments(ae.encode(X), centers)
            p_full = target_distribution(q_full)
            history.soft_entropy.append(assignment_entropy(q_full))
        order = rng.permutation(n)
        epoch_recon = 0.0
        epoch_cluster = 0.0
        for lo in range(0, n, ae.batch_size):
            idx = order[lo:lo + ae.batch_size]
            batch = X[idx]
            acts = forward(ae.weights_, batch)
            epoch_recon += float(np.sum((acts[-1] - batch) ** 2))
            latent_grad = None
            if gamma != 0.0:
                z = acts[latent_half]
                q = soft_assignments(z, centers)
                p = p_full[idx]
                ratio = np.clip(p, 1e-12, 1.0) / np.clip(q, 1e-12, 1.0)
                epoch_cluster += float((p * np.log(ratio)).sum())
                dZ, dC = _cluster_grads(z, centers, p, q)
                latent_grad = gamma * dZ
                if ae.lr != 0.0:
                    centers = centers - ae.lr * gamma * dC
            grads = backward(ae.weights_, acts, batch, latent_grad=latent_grad)
            ae._apply(grads)
        history.recon_loss.append(epoch_recon / (n * d))
        if gamma != 0.0:
            history.cluster_loss.append(epoch_cluster / n)
    return ae, centers, history
