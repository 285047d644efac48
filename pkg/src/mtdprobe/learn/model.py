"""Persistable detection model: normalizer, autoencoder, cluster centers.

The on-disk format is canonical JSON (sorted keys, repr-exact floats), so a
save -> load -> save round trip is byte identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import ModelFormatError
from .autoencoder import Autoencoder
from .normalize import Normalizer

FORMAT_VERSION = 1


@dataclass
class DetectionModel:
    dimension_names: list
    normalizer_mean: np.ndarray
    normalizer_scale: np.ndarray
    layer_sizes: list
    weights: list                  # [(W, b), ...] as float64 arrays
    latent_dim: int
    centers: np.ndarray            # k x latent
    k: int
    trigger_cluster_hint: Optional[int] = None
    metadata: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.k != self.centers.shape[0]:
            raise ModelFormatError(
                f"k={self.k} but {self.centers.shape[0]} cluster centers")
        if self.centers.shape[1] != self.latent_dim:
            raise ModelFormatError("cluster centers do not match latent_dim")
        d = len(self.dimension_names)
        if self.normalizer_mean.shape != (d,) or self.normalizer_scale.shape != (d,):
            raise ModelFormatError("normalizer statistics do not match dimensions")
        if np.any(self.normalizer_scale <= 0):
            raise ModelFormatError("normalizer scale must be positive")
        expect = list(zip(self.layer_sizes[:-1], self.layer_sizes[1:]))
        if len(self.weights) != len(expect):
            raise ModelFormatError("weight count does not match layer sizes")
        for (W, b), (fi, fo) in zip(self.weights, expect):
            if W.shape != (fi, fo) or b.shape != (fo,):
                raise ModelFormatError(
                    f"weight shape {W.shape}/{b.shape} does not match layers ({fi},{fo})")
        if self.layer_sizes[len(self.layer_sizes) // 2] != self.latent_dim:
            raise ModelFormatError("latent_dim does not match bottleneck layer")

    def make_normalizer(self) -> Normalizer:
        norm = Normalizer()
        norm.mean_ = self.normalizer_mean.copy()
        norm.scale_ = self.normalizer_scale.copy()
        return norm

    def make_autoencoder(self) -> Autoencoder:
        ae = Autoencoder(hidden_dim=self.layer_sizes[1], latent_dim=self.latent_dim)
        ae.layer_sizes_ = list(self.layer_sizes)
        ae.weights_ = [(W.copy(), b.copy()) for W, b in self.weights]
        ae.velocity_ = [(np.zeros_like(W), np.zeros_like(b)) for W, b in self.weights]
        ae.loss_curve_ = list(self.metadata.get("loss_curve", []))
        return ae


def save_model(model: DetectionModel, path) -> None:
    model.validate()
    payload = {
        "format_version": FORMAT_VERSION,
        "dimension_names": model.dimension_names,
        "normalizer_mean": model.normalizer_mean.tolist(),
        "normalizer_scale": model.normalizer_scale.tolist(),
        "layer_sizes": model.layer_sizes,
        "weights": [{"W": W.tolist(), "b": b.tolist()} for W, b in model.weights],
        "latent_dim": model.latent_dim,
        "centers": model.centers.tolist(),
        "k": model.k,
        "trigger_cluster_hint": model.trigger_cluster_hint,
        "metadata": model.metadata,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_model(path) -> DetectionModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"unreadable model file {path}: {exc}") from exc
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"model format version {version!r} not supported (expected {FORMAT_VERSION})")
    try:
        model = DetectionModel(
            dimension_names=list(payload["dimension_names"]),
            normalizer_mean=np.asarray(payload["normalizer_mean"], dtype=np.float64),
            normalizer_scale=np.asarray(payload["normalizer_scale"], dtype=np.float64),
            layer_sizes=list(payload["layer_sizes"]),
            weights=[(np.asarray(w["W"], dtype=np.float64),
                      np.asarray(w["b"], dtype=np.float64))
                     for w in payload["weights"]],
            latent_dim=int(payload["latent_dim"]),
            centers=np.asarray(payload["centers"], dtype=np.float64),
            k=int(payload["k"]),
            trigger_cluster_hint=payload.get("trigger_cluster_hint"),
            metadata=dict(payload.get("metadata", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model file {path}: {exc}") from exc
    model.validate()
    return model
