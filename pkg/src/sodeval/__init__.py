"""Evaluation toolkit for salient-object segmentation with multiple
predictions and multiple ground-truth masks per image."""

from .errors import DimensionMismatchError, EmptyGroundTruthError, ValidationError
from .masks import Mask, as_mask, binarize, load_mask, save_mask
from .manifest import (
    ImageRecord,
    Manifest,
    Prediction,
    PredictionRef,
    RecordRef,
    iter_records,
    load_manifest,
    load_record,
    parse_manifest,
    save_manifest,
)
from .metrics import (
    ConventionalReport,
    ConventionalRow,
    DEFAULT_CONFIG,
    FCurve,
    MetricConfig,
    conventional_csv,
    conventional_eval,
    e_measure_mean,
    f_curve,
    f_max,
    f_mean,
    mae,
    match_score,
    s_measure,
)
from .matching import (
    DEFAULT_TAUS,
    EvalReport,
    ImageScore,
    best_f1_point,
    curve_to_csv,
    evaluate,
    f1_harmonic,
    filter_by_quality,
    image_precision,
    image_recall,
    kept_indices,
    match_matrix,
    pr_curve,
    report_to_json,
    select_best_masks,
)
from .losses import (
    DEFAULT_LOSS_CONFIG,
    LossBreakdown,
    LossConfig,
    MinLossSelection,
    ce_loss,
    dice_loss,
    mask_loss,
    min_loss_select,
    mse_quality_loss,
    normalize_quality_level,
)
from .preference import (
    CandidatePair,
    PreferencePair,
    alignment_accuracy,
    load_pairs,
    score_pairs_with_metric,
)
from .synthgen import (
    DEFAULT_SCHEDULE,
    Degradation,
    SceneSpec,
    degradation_alignment_pairs,
    degrade,
    generate_benchmark,
    generate_scene,
)

__version__ = "0.1.0"

__all__ = [
    "CandidatePair",
    "ConventionalReport",
    "ConventionalRow",
    "DEFAULT_CONFIG",
    "DEFAULT_LOSS_CONFIG",
    "DEFAULT_SCHEDULE",
    "DEFAULT_TAUS",
    "Degradation",
    "DimensionMismatchError",
    "EmptyGroundTruthError",
    "EvalReport",
    "FCurve",
    "ImageRecord",
    "ImageScore",
    "LossBreakdown",
    "LossConfig",
    "Manifest",
    "Mask",
    "MetricConfig",
    "MinLossSelection",
    "Prediction",
    "PredictionRef",
    "PreferencePair",
    "RecordRef",
    "SceneSpec",
    "ValidationError",
    "alignment_accuracy",
    "as_mask",
    "best_f1_point",
    "binarize",
    "ce_loss",
    "conventional_csv",
    "conventional_eval",
    "curve_to_csv",
    "degradation_alignment_pairs",
    "degrade",
    "dice_loss",
    "e_measure_mean",
    "evaluate",
    "f1_harmonic",
    "f_curve",
    "f_max",
    "f_mean",
    "filter_by_quality",
    "generate_benchmark",
    "generate_scene",
    "image_precision",
    "image_recall",
    "iter_records",
    "kept_indices",
    "load_mask",
    "load_manifest",
    "load_pairs",
    "load_record",
    "mae",
    "mask_loss",
    "match_matrix",
    "match_score",
    "min_loss_select",
    "mse_quality_loss",
    "normalize_quality_level",
    "parse_manifest",
    "pr_curve",
    "report_to_json",
    "s_measure",
    "save_manifest",
    "save_mask",
    "score_pairs_with_metric",
    "select_best_masks",
]
