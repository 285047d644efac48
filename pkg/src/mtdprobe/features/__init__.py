from .extract import (
    FEATURE_FAMILIES, FEATURE_NAMES, TIMING_RATE_FAMILIES, FeatureExtractor,
    FeatureMatrix, extract_features,
)
from .flows import FlowAssembly, FlowRecord, assemble_flows
from .labeling import drop_constant_features, label_flows, undersample

__all__ = [
    "FEATURE_NAMES", "FEATURE_FAMILIES", "TIMING_RATE_FAMILIES",
    "FeatureExtractor", "FeatureMatrix", "extract_features",
    "FlowRecord", "FlowAssembly", "assemble_flows",
    "label_flows", "undersample", "drop_constant_features",
]
