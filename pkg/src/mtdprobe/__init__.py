"""Simulator of an IP-shuffling SDN defense plus the passive fingerprinting
pipeline that detects its triggers and estimates the shuffle interval."""

from .config import SimConfig
from .detect.metrics import adjusted_rand_index, clustering_accuracy
from .detect.report import DetectionReport, analyze_trial
from .detect.triggers import (
    estimate_interval, group_trigger_estimates, identify_trigger_cluster,
    match_detections,
)
from .experiments import ExperimentSpec, presets, run_experiment, run_transfer
from .features.extract import FeatureExtractor, FeatureMatrix, extract_features
from .features.flows import FlowRecord, assemble_flows
from .features.labeling import drop_constant_features, label_flows, undersample
from .learn.autoencoder import Autoencoder
from .learn.kmeans import KMeans
from .learn.model import DetectionModel, load_model, save_model
from .learn.normalize import Normalizer
from .learn.pipeline import TriggerDetector
from .simulate.engine import run_simulation, simulate_flow_records
from .simulate.packets import PacketEvent, PacketTrace, TriggerLog

__all__ = [
    "SimConfig", "PacketEvent", "PacketTrace", "TriggerLog",
    "run_simulation", "simulate_flow_records",
    "FlowRecord", "assemble_flows", "FeatureExtractor", "FeatureMatrix",
    "extract_features", "label_flows", "undersample", "drop_constant_features",
    "Normalizer", "Autoencoder", "KMeans", "TriggerDetector",
    "DetectionModel", "save_model", "load_model",
    "adjusted_rand_index", "clustering_accuracy",
    "identify_trigger_cluster", "group_trigger_estimates", "match_detections",
    "estimate_interval", "DetectionReport", "analyze_trial",
    "ExperimentSpec", "run_experiment", "run_transfer", "presets",
]

__version__ = "0.1.0"
