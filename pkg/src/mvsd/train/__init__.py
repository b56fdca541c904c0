from .harness import (
    ABLATION_REFERENCE,
    ABLATION_SETTINGS,
    FREEZE_REFERENCE,
    FREEZE_SETTINGS,
    LOW_RESOURCE_FRACTIONS,
    LOW_RESOURCE_REFERENCE,
    ablate,
    export_attention,
    freeze_sweep,
    low_resource_sweep,
    metrics_table_text,
    render_table,
)
from .loop import (
    FREEZE_CHOICES,
    FREEZE_GROUPS,
    EpochRecord,
    RunHistory,
    TrainConfig,
    build_model,
    labeled_split,
    train,
)
from .metrics import Metrics, compute_metrics, evaluate_model, metrics_from_counts
from .optim import AdamW

__all__ = [
    "ABLATION_REFERENCE",
    "ABLATION_SETTINGS",
    "FREEZE_REFERENCE",
    "FREEZE_SETTINGS",
    "LOW_RESOURCE_FRACTIONS",
    "LOW_RESOURCE_REFERENCE",
    "ablate",
    "export_attention",
    "freeze_sweep",
    "low_resource_sweep",
    "metrics_table_text",
    "render_table",
    "FREEZE_CHOICES",
    "FREEZE_GROUPS",
    "EpochRecord",
    "RunHistory",
    "TrainConfig",
    "build_model",
    "labeled_split",
    "train",
    "Metrics",
    "compute_metrics",
    "evaluate_model",
    "metrics_from_counts",
    "AdamW",
]
