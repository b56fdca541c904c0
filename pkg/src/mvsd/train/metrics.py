"""Binary classification metrics with the sarcastic class (1) as positive."""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import ArgumentError
from ..model.fusion import VIEWS, predict


@dataclass
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int
    degenerate: bool  # true when the model predicted no positives at all

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "confusion": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
            "degenerate": self.degenerate,
        }


def metrics_from_counts(tp: int, fp: int, fn: int, tn: int) -> Metrics:
    """Ratios from confusion counts; undefined ratios fall back to 0."""
    total = tp + fp + fn + tn
    if total == 0:
        raise ArgumentError("cannot compute metrics over zero samples")
    accuracy = (tp + tn) / total
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return Metrics(
        accuracy=accuracy, precision=precision, recall=recall, f1=f1,
        tp=tp, fp=fp, fn=fn, tn=tn, degenerate=(tp + fp == 0),
    )


def compute_metrics(golds, preds) -> Metrics:
    if len(golds) != len(preds):
        raise ArgumentError("gold and prediction lists differ in length")
    tp = fp = fn = tn = 0
    for g, p in zip(golds, preds):
        if g not in (0, 1) or p not in (0, 1):
            raise ArgumentError("labels and predictions must be 0 or 1")
        if p == 1:
            if g == 1:
                tp += 1
            else:
                fp += 1
        else:
            if g == 1:
                fn += 1
            else:
                tn += 1
    return metrics_from_counts(tp, fp, fn, tn)


def evaluate_model(model, samples, views=VIEWS) -> Metrics:
    """Run the model over labeled samples and score its fused predictions.

    `views` selects which per-view distributions sum into the fused score;
    the default uses all three, matching ordinary inference.
    """
    if not samples:
        raise ArgumentError("cannot evaluate on an empty sample list")
    golds = []
    preds = []
    for sample in samples:
        if sample.label is None:
            raise ArgumentError(f"sample {sample.id!r} has no label")
        out = model.forward(sample)
        by_view = {"t": out.y_t, "v": out.y_v, "f": out.y_f}
        fused = None
        for view in views:
            fused = by_view[view] if fused is None else fused + by_view[view]
        golds.append(sample.label)
        preds.append(predict(fused))
    return compute_metrics(golds, preds)
