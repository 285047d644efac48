from .importance import feature_importance
from .metrics import adjusted_rand_index, clustering_accuracy
from .report import REPORT_COLUMNS, DetectionReport, analyze_trial
from .triggers import (
    estimate_interval, group_trigger_estimates, identify_trigger_cluster,
    match_detections, trigger_time_estimates,
)

__all__ = [
    "adjusted_rand_index", "clustering_accuracy", "feature_importance",
    "identify_trigger_cluster", "trigger_time_estimates",
    "group_trigger_estimates", "match_detections", "estimate_interval",
    "DetectionReport", "REPORT_COLUMNS", "analyze_trial",
]
