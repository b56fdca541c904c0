"""Training loop: seeded shuffling, per-view joint loss, best-validation restore."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ArgumentError, ConfigurationError
from ..model.fusion import VIEWS, FusionModel, ModelConfig, joint_loss
from ..model.providers import TEXT_BACKBONE, VISUAL_BACKBONE
from ..numeric import ClampCounter
from .metrics import Metrics, evaluate_model
from .optim import AdamW

FREEZE_CHOICES = ("none", "text_encoder", "visual_encoder", "all")
FREEZE_GROUPS = {
    "none": (),
    "text_encoder": (TEXT_BACKBONE,),
    "visual_encoder": (VISUAL_BACKBONE,),
    "all": (TEXT_BACKBONE, VISUAL_BACKBONE),
}


@dataclass
class TrainConfig:
    batch_size: int = 32
    epochs: int = 10
    lr_backbone: float = 1e-6
    lr_head: float = 5e-4
    weight_decay: float = 0.0
    seed: int = 0
    view_losses_enabled: tuple = VIEWS
    freeze: str = "none"
    interaction_kind: str = "transformer"
    provider: str = "toy"

    def __post_init__(self):
        self.view_losses_enabled = tuple(self.view_losses_enabled)
        if not self.view_losses_enabled:
            raise ConfigurationError("at least one view loss must stay enabled")
        for view in self.view_losses_enabled:
            if view not in VIEWS:
                raise ConfigurationError(f"unknown view {view!r}")
        if self.lr_backbone <= 0 or self.lr_head <= 0:
            raise ConfigurationError("learning rates must be positive")
        if self.freeze not in FREEZE_CHOICES:
            raise ConfigurationError(f"freeze must be one of {FREEZE_CHOICES}")
        if self.batch_size < 1 or self.epochs < 1:
            raise ConfigurationError("batch_size and epochs must be at least 1")

    def to_dict(self) -> dict:
        return {
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "lr_backbone": self.lr_backbone,
            "lr_head": self.lr_head,
            "weight_decay": self.weight_decay,
            "seed": self.seed,
            "view_losses_enabled": list(self.view_losses_enabled),
            "freeze": self.freeze,
            "interaction_kind": self.interaction_kind,
            "provider": self.provider,
        }


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_metrics: Metrics | None
    is_best: bool


@dataclass
class RunHistory:
    epochs: list = field(default_factory=list)
    best_epoch: int | None = None
    test_metrics: Metrics | None = None
    clamp_events: int = 0
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "epochs": [
                {
                    "epoch": r.epoch,
                    "train_loss": r.train_loss,
                    "val_metrics": r.val_metrics.to_dict() if r.val_metrics else None,
                    "is_best": r.is_best,
                }
                for r in self.epochs
            ],
            "best_epoch": self.best_epoch,
            "test_metrics": self.test_metrics.to_dict() if self.test_metrics else None,
            "clamp_events": self.clamp_events,
            "config": self.config,
        }


def labeled_split(corpus, split: str):
    return [s for s in corpus.split_samples(split) if s.label is not None]


def build_model(provider, config: TrainConfig, model_config: ModelConfig | None = None):
    if model_config is None:
        model_config = ModelConfig(
            d=provider.d,
            patches=getattr(provider, "m", 4),
            vocab=getattr(provider, "vocab", 256),
            provider_seed=getattr(provider, "seed", 0),
            interaction_kind=config.interaction_kind,
            provider=config.provider,
            param_seed=config.seed,
        )
    return FusionModel(provider, model_config)


def train(corpus, provider, config: TrainConfig, model: FusionModel | None = None, model_config=None):
    """Train on the labeled train split; restore the best-validation epoch.

    Unlabeled train samples (annotation still pending) are skipped. With an
    empty validation split the final epoch stands in for the best one. Runs
    are bit-deterministic for a fixed (corpus, provider, config).
    """
    train_samples = labeled_split(corpus, "train")
    if not train_samples:
        raise ArgumentError("train split has no labeled samples")
    val_samples = labeled_split(corpus, "validation")
    if model is None:
        model = build_model(provider, config, model_config)
    store = model.store
    for group in FREEZE_GROUPS[config.freeze]:
        if group in store.groups():
            store.freeze_group(group)
    optimizer = AdamW(
        store,
        lr_head=config.lr_head,
        lr_backbone=config.lr_backbone,
        weight_decay=config.weight_decay,
    )
    counter = ClampCounter()
    rng = np.random.Generator(np.random.PCG64(config.seed))
    history = RunHistory(config={"train": config.to_dict(), "model": model.config.to_dict()})
    best_acc = -1.0
    best_arrays = None
    n = len(train_samples)
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        loss_total = 0.0
        for start in range(0, n, config.batch_size):
            batch = [train_samples[i] for i in order[start : start + config.batch_size]]
            store.zero_grad()
            total = None
            for sample in batch:
                loss = joint_loss(
                    model.forward(sample), sample.label,
                    enabled=config.view_losses_enabled, counter=counter,
                )
                total = loss if total is None else total + loss
            batch_mean = total * (1.0 / len(batch))
            batch_mean.backward()
            optimizer.step()
            loss_total += float(batch_mean.data) * len(batch)
        train_loss = loss_total / n
        val_metrics = evaluate_model(model, val_samples) if val_samples else None
        if val_metrics is not None:
            is_best = val_metrics.accuracy > best_acc
            if is_best:
                best_acc = val_metrics.accuracy
                best_arrays = store.copy_arrays()
                history.best_epoch = epoch
        else:
            is_best = True
            best_arrays = store.copy_arrays()
            history.best_epoch = epoch
        history.epochs.append(EpochRecord(epoch, train_loss, val_metrics, is_best))
    if best_arrays is not None:
        store.load_arrays(best_arrays)
    test_samples = labeled_split(corpus, "test")
    if test_samples:
        history.test_metrics = evaluate_model(model, test_samples)
    history.clamp_events = counter.count
    return model, history
