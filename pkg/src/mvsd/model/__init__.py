from .checkpoint import Checkpoint, load_checkpoint, model_from_checkpoint, save_checkpoint
from .embfile import SampleEmbedding, read_embeddings, write_embeddings
from .fusion import (
    INTERACTION_KINDS,
    VIEWS,
    FusionModel,
    InteractionTrace,
    ModelConfig,
    ViewOutputs,
    aggregate,
    joint_loss,
    predict,
)
from .providers import (
    TEXT_BACKBONE,
    VISUAL_BACKBONE,
    FileProvider,
    ImageEncoding,
    TextEncoding,
    ToyProvider,
)

__all__ = [
    "Checkpoint",
    "load_checkpoint",
    "model_from_checkpoint",
    "save_checkpoint",
    "SampleEmbedding",
    "read_embeddings",
    "write_embeddings",
    "INTERACTION_KINDS",
    "VIEWS",
    "FusionModel",
    "InteractionTrace",
    "ModelConfig",
    "ViewOutputs",
    "aggregate",
    "joint_loss",
    "predict",
    "TEXT_BACKBONE",
    "VISUAL_BACKBONE",
    "FileProvider",
    "ImageEncoding",
    "TextEncoding",
    "ToyProvider",
]
