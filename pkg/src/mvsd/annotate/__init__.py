from .agreement import (
    FINAL_LABELS,
    LABEL_NOT_SARCASM,
    LABEL_SARCASM,
    LABEL_UNDECIDED,
    ONBOARDING_SIZE,
    ONBOARDING_THRESHOLD,
    WIRE_LABELS,
    KappaReport,
    cohen_kappa,
    grade_onboarding,
)
from .api import create_app, load_gold
from .store import (
    EXPERT_VOTES,
    INT_TO_LABEL,
    LABEL_TO_INT,
    ROLES,
    TASK_KINDS,
    TASK_STATES,
    AnnotationStore,
    Annotator,
    Task,
)

__all__ = [
    "FINAL_LABELS",
    "LABEL_NOT_SARCASM",
    "LABEL_SARCASM",
    "LABEL_UNDECIDED",
    "ONBOARDING_SIZE",
    "ONBOARDING_THRESHOLD",
    "WIRE_LABELS",
    "KappaReport",
    "cohen_kappa",
    "grade_onboarding",
    "create_app",
    "load_gold",
    "EXPERT_VOTES",
    "INT_TO_LABEL",
    "LABEL_TO_INT",
    "ROLES",
    "TASK_KINDS",
    "TASK_STATES",
    "AnnotationStore",
    "Annotator",
    "Task",
]
