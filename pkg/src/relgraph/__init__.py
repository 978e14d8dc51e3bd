"""relgraph: data diagnosis through relation graphs on model embeddings.

Detects label errors by solving a regularized max-cut over signed
similarity relations, scores outliers by inverse aggregated kernel mass,
and ships the baselines, metrics, noise injection, and relation-map
export needed to evaluate both.
"""

__version__ = "0.1.0"

from .baselines import BaselineScores, score_label_baseline, score_ood_baseline
from .estimators import LabelNoiseDetector, OutlierScorer
from .kernel import (
    KernelConfig,
    KernelTile,
    compatibility,
    feature_similarity,
    kernel_value,
    relation_tile,
    relation_value,
)
from .labelnoise import (
    MaxCutConfig,
    NoiseScoreResult,
    detect_label_noise,
    detect_label_noise_single,
    detect_partitioned,
    ensemble_scores,
    initial_scores,
)
from .metrics import auroc, average_precision, tnr_at_tpr
from .noisegen import NoiseSpec, inject_noise
from .outlier import OutlierConfig, outlier_scores, sample_reference
from .relmap import RelationMapPoint, emit_scatter, relation_map
from .tensorio import DatasetHandle, load_tensor, save_tensor, validate_dataset

__all__ = [
    "__version__",
    "BaselineScores",
    "DatasetHandle",
    "KernelConfig",
    "KernelTile",
    "LabelNoiseDetector",
    "MaxCutConfig",
    "NoiseScoreResult",
    "NoiseSpec",
    "OutlierConfig",
    "OutlierScorer",
    "RelationMapPoint",
    "auroc",
    "average_precision",
    "compatibility",
    "detect_label_noise",
    "detect_label_noise_single",
    "detect_partitioned",
    "emit_scatter",
    "ensemble_scores",
    "feature_similarity",
    "initial_scores",
    "inject_noise",
    "kernel_value",
    "load_tensor",
    "outlier_scores",
    "relation_map",
    "relation_tile",
    "relation_value",
    "sample_reference",
    "save_tensor",
    "score_label_baseline",
    "score_ood_baseline",
    "tnr_at_tpr",
    "validate_dataset",
]
