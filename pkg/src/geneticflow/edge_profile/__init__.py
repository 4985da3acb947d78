"""Edge profiling: per-citation features and the extend-type classifier."""

from .features import (
    FEATURE_GROUPS,
    FEATURE_NAMES,
    EdgeFeatureExtractor,
    EdgeFeatureVector,
    export_edge_features,
    extract_features,
    group_mask,
    stack,
)
from .forest import (
    ExtendModel,
    ForestConfig,
    cross_validate_classifier,
    cross_validate_forest,
    fit_forest,
    predict_extend_prob,
    train_extend_classifier,
)

__all__ = [
    "FEATURE_GROUPS",
    "FEATURE_NAMES",
    "EdgeFeatureExtractor",
    "EdgeFeatureVector",
    "ExtendModel",
    "ForestConfig",
    "cross_validate_classifier",
    "cross_validate_forest",
    "export_edge_features",
    "extract_features",
    "fit_forest",
    "group_mask",
    "predict_extend_prob",
    "stack",
    "train_extend_classifier",
]
