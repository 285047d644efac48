from .autoencoder import Autoencoder
from .kmeans import KMeans
from .model import DetectionModel, load_model, save_model
from .normalize import Normalizer
from .pipeline import TriggerDetector
from .refine import refine_jointly, soft_assignments, target_distribution

__all__ = [
    "Autoencoder", "KMeans", "Normalizer", "TriggerDetector",
    "DetectionModel", "save_model", "load_model",
    "refine_jointly", "soft_assignments", "target_distribution",
]
