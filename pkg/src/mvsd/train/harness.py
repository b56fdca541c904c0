"""Experiment harnesses: view-loss ablation, backbone freezing, low-resource
training, and attention export.

Reports carry published full-scale results under "reference_full_scale" keys
for side-by-side reading. Those numbers come from full-size runs with real
backbones, so they are annotations only; nothing here asserts against them.
"""
from __future__ import annotations

import json
import math

import numpy as np

from ..corpus import subsample
from ..errors import ArgumentError, ConfigurationError, NumericError
from ..model.fusion import VIEWS
from .loop import TrainConfig, build_model, train

ABLATION_SETTINGS = (
    ("full", ("t", "v", "f")),
    ("no_text_loss", ("v", "f")),
    ("no_image_loss", ("t", "f")),
    ("no_interaction_loss", ("t", "v")),
)
ABLATION_REFERENCE = {
    "full": {"accuracy": 85.64, "precision": 80.33, "recall": 88.24, "f1": 84.10},
    "no_text_loss": {"accuracy": 84.18, "precision": 80.60, "recall": 83.32, "f1": 81.93},
    "no_image_loss": {"accuracy": 83.69, "precision": 76.97, "recall": 88.62, "f1": 82.38},
    "no_interaction_loss": {"accuracy": 82.44, "precision": 73.80, "recall": 91.80, "f1": 81.82},
}

FREEZE_SETTINGS = (
    ("freeze_all", "all"),
    ("freeze_visual", "visual_encoder"),
    ("freeze_text", "text_encoder"),
    ("full_finetuned", "none"),
)
FREEZE_REFERENCE = {
    "freeze_all": {"accuracy": 84.72, "f1": 83.64},
    "freeze_visual": {"accuracy": 84.85, "f1": 83.60},
    "freeze_text": {"accuracy": 84.93, "f1": 83.48},
    "full_finetuned": {"accuracy": 85.64, "f1": 84.10},
}

LOW_RESOURCE_FRACTIONS = (0.1, 0.2, 0.5, 1.0)
LOW_RESOURCE_REFERENCE = {0.1: 81.20, 0.2: 81.69, 0.5: 84.43, 1.0: 85.64}


def _clone_config(config: TrainConfig, **overrides) -> TrainConfig:
    base = config.to_dict()
    base.update(overrides)
    base["view_losses_enabled"] = tuple(base["view_losses_enabled"])
    return TrainConfig(**base)


def render_table(headers, rows) -> str:
    cells = [list(map(str, headers))] + [list(map(str, r)) for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = []
    for j, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if j == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _metrics_row(name, metrics, reference):
    return {
        "setting": name,
        "metrics": metrics.to_dict() if metrics else None,
        "reference_full_scale": reference,
    }


def ablate(corpus, provider, config: TrainConfig, strict_fusion: bool = False) -> dict:
    """Retrain with each view's loss term removed in turn, same seed each run.

    A removed loss still leaves that view's distribution inside the fused
    prediction; `strict_fusion` additionally drops it from the fusion sum at
    evaluation time.
    """
    from .metrics import evaluate_model
    from .loop import labeled_split

    rows = []
    for name, views in ABLATION_SETTINGS:
        run_cfg = _clone_config(config, view_losses_enabled=views)
        model, history = train(corpus, provider, run_cfg)
        metrics = history.test_metrics
        if strict_fusion and name != "full":
            test_samples = labeled_split(corpus, "test")
            metrics = evaluate_model(model, test_samples, views=views) if test_samples else None
        row = _metrics_row(name, metrics, ABLATION_REFERENCE[name])
        row["views"] = list(views)
        rows.append(row)
    return {
        "harness": "ablation",
        "strict_fusion": strict_fusion,
        "rows": rows,
        "config": config.to_dict(),
    }


def freeze_sweep(corpus, provider, config: TrainConfig) -> dict:
    """Train under the four backbone-freezing regimes and verify frozen
    parameters never drift."""
    if not getattr(provider, "trainable", False):
        raise ConfigurationError(
            "freeze sweep needs a provider with trainable backbone parameters"
        )
    rows = []
    for name, freeze in FREEZE_SETTINGS:
        run_cfg = _clone_config(config, freeze=freeze)
        model = build_model(provider, run_cfg)
        backbone_before = {
            pname: t.data.copy()
            for pname, t in model.store.items()
            if model.store.group_of(pname).endswith("backbone")
        }
        model, history = train(corpus, provider, run_cfg, model=model)
        changed = []
        for pname, before in backbone_before.items():
            after = model.store[pname].data
            if model.store.is_frozen(pname):
                if not np.array_equal(before, after):
                    raise NumericError(f"frozen parameter {pname!r} drifted during training")
            elif not np.array_equal(before, after):
                changed.append(pname)
        row = _metrics_row(name, history.test_metrics, FREEZE_REFERENCE[name])
        row["freeze"] = freeze
        row["backbone_params_changed"] = sorted(changed)
        rows.append(row)
    return {"harness": "freeze_sweep", "rows": rows, "config": config.to_dict()}


def low_resource_sweep(
    corpus, provider, config: TrainConfig, fractions=LOW_RESOURCE_FRACTIONS
) -> dict:
    """Train on stratified train-split subsets of growing size."""
    rows = []
    for fraction in fractions:
        reduced = subsample(corpus, fraction, seed=config.seed)
        model, history = train(reduced, provider, config)
        row = _metrics_row(
            f"fraction_{fraction}",
            history.test_metrics,
            {"accuracy": LOW_RESOURCE_REFERENCE.get(fraction)},
        )
        row["fraction"] = fraction
        row["train_size"] = len(reduced.split_samples("train"))
        rows.append(row)
    return {"harness": "low_resource", "rows": rows, "config": config.to_dict()}


def export_attention(model, sample, path) -> dict:
    """Write the interaction block's attention from the text-CLS query to the
    image-patch positions, averaged over heads, as a JSON grid."""
    if model.config.interaction_kind != "transformer":
        raise ConfigurationError("attention export needs the transformer interaction")
    out = model.forward(sample)
    attn = out.interaction_attention  # (heads, L, L)
    if attn is None:
        raise ArgumentError("forward pass produced no interaction attention")
    heads, length, _ = attn.shape
    n = len(sample.tokens)
    m = length - n - 2
    if m < 1:
        raise ArgumentError("sample has no image-patch positions")
    row = attn[:, length - 1, :].mean(axis=0)
    patch_weights = row[1 : m + 1]
    side = int(math.isqrt(m))
    grid = None
    if side * side == m:
        grid = [patch_weights[r * side : (r + 1) * side].tolist() for r in range(side)]
    payload = {
        "sample_id": sample.id,
        "image_ref": sample.image_ref,
        "tokens": list(sample.tokens),
        "heads": heads,
        "sequence_length": length,
        "patch_count": m,
        "patch_weights": patch_weights.tolist(),
        "patch_grid": grid,
        "total_patch_mass": float(patch_weights.sum()),
        "query_row": row.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return payload


def metrics_table_text(report: dict) -> str:
    """Aligned text rendering for any harness report with metric rows."""
    headers = ["setting", "acc", "p", "r", "f1", "ref_acc"]
    rows = []
    for row in report["rows"]:
        metrics = row.get("metrics")
        ref = row.get("reference_full_scale") or {}
        if metrics:
            rows.append(
                [
                    row["setting"],
                    f"{metrics['accuracy']:.4f}",
                    f"{metrics['precision']:.4f}",
                    f"{metrics['recall']:.4f}",
                    f"{metrics['f1']:.4f}",
                    ref.get("accuracy", ""),
                ]
            )
        else:
            rows.append([row["setting"], "-", "-", "-", "-", ref.get("accuracy", "")])
    return render_table(headers, rows)
