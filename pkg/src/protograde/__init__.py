"""Prototype-based ordinal proficiency grading over pooled embeddings.

The library trains metric-based (prototypical) or plain softmax heads on
fixed embedding vectors, optionally re-weighting the loss against class
imbalance, and evaluates with ordinal-aware metrics.  See the CLI
(``protograde --help``) for the file-level workflow.
"""

from .dataset import (
    Dataset,
    EmbeddingRecord,
    LevelSchema,
    SynthParams,
    class_frequencies,
    default_level_names,
    gen_synthetic,
    load_dataset,
    mean_pool,
    pooled_vector,
    save_dataset,
    split_matrix,
)
from .errors import DataError, NumericError, ProtogradeError, UsageError
from .loss import (
    ClassWeightScheme,
    batch_weighted_ce,
    loss_and_grads,
    weighted_ce,
    weights_alpha,
    weights_inverse,
)
from .metrics import (
    EvalReport,
    confusion_matrix,
    evaluate,
    group_accuracy,
    macro_metrics,
    report_from_predictions,
    standard_metrics,
    write_confusion_csv,
    write_group_json,
    write_metrics_json,
)
from .model import (
    Distribution,
    HeadModel,
    Projection,
    aggregate_similarity,
    baseline_forward,
    init_prototypes,
    load_checkpoint,
    predict,
    proto_forward,
    save_checkpoint,
    sim_cos,
    sim_sed,
)
from .presets import synth_preset, synth_train_config
from .trainer import AdamW, EpochRecord, TrainConfig, TrainHistory, train, warm_start_model

__version__ = "0.1.0"

__all__ = [
    "AdamW",
    "ClassWeightScheme",
    "DataError",
    "Dataset",
    "Distribution",
    "EmbeddingRecord",
    "EpochRecord",
    "EvalReport",
    "HeadModel",
    "LevelSchema",
    "NumericError",
    "Projection",
    "ProtogradeError",
    "SynthParams",
    "TrainConfig",
    "TrainHistory",
    "UsageError",
    "aggregate_similarity",
    "baseline_forward",
    "batch_weighted_ce",
    "class_frequencies",
    "confusion_matrix",
    "default_level_names",
    "evaluate",
    "gen_synthetic",
    "group_accuracy",
    "init_prototypes",
    "load_checkpoint",
    "load_dataset",
    "loss_and_grads",
    "macro_metrics",
    "mean_pool",
    "pooled_vector",
    "predict",
    "proto_forward",
    "report_from_predictions",
    "save_checkpoint",
    "save_dataset",
    "sim_cos",
    "sim_sed",
    "split_matrix",
    "standard_metrics",
    "synth_preset",
    "synth_train_config",
    "train",
    "warm_start_model",
    "weighted_ce",
    "weights_alpha",
    "weights_inverse",
    "write_confusion_csv",
    "write_group_json",
    "write_metrics_json",
]
