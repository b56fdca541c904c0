"""Three-view fusion classifier with late fusion and a joint per-view loss.

Views: text (classifier on t_cls), image (classifier on v_cls), and an
image-text interaction view that concatenates both sequences as
(v_cls, v_1..v_m, t_1..t_n, t_cls), runs an encoder block, pools the two
updated CLS vectors with keyless attention, and classifies the pooled vector.
The per-view distributions are summed (not renormalized) for prediction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..corpus import Sample
from ..errors import ArgumentError, ConfigurationError, DimensionError
from ..numeric import (
    ClampCounter,
    ParamSpec,
    Tensor,
    block_param_specs,
    clamped_log,
    concat,
    init_params,
    linear,
    matmul,
    multi_head_attention,
    relu,
    reshape,
    softmax,
    transformer_encoder_block,
)
from .providers import ImageEncoding, TextEncoding

VIEWS = ("t", "v", "f")
INTERACTION_KINDS = ("transformer", "cross_attention", "mlp")


@dataclass
class ModelConfig:
    d: int = 16
    heads: int | None = None  # defaults to 8 at d >= 512, else 4
    ffn_hidden: int | None = None  # defaults to 4 * d
    mlp_hidden: int | None = None  # defaults to d
    patches: int = 4
    vocab: int = 256
    interaction_kind: str = "transformer"
    provider: str = "toy"  # toy | file
    provider_seed: int = 0
    param_seed: int = 0
    trainable_backbone: bool = True

    def __post_init__(self):
        if self.heads is None:
            self.heads = 8 if self.d >= 512 else 4
        if self.ffn_hidden is None:
            self.ffn_hidden = 4 * self.d
        if self.mlp_hidden is None:
            self.mlp_hidden = self.d
        if self.d % self.heads != 0:
            raise ConfigurationError(f"width {self.d} not divisible by {self.heads} heads")
        if self.interaction_kind not in INTERACTION_KINDS:
            raise ConfigurationError(f"unknown interaction kind {self.interaction_kind!r}")

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "heads": self.heads,
            "ffn_hidden": self.ffn_hidden,
            "mlp_hidden": self.mlp_hidden,
            "patches": self.patches,
            "vocab": self.vocab,
            "interaction_kind": self.interaction_kind,
            "provider": self.provider,
            "provider_seed": self.provider_seed,
            "param_seed": self.param_seed,
            "trainable_backbone": self.trainable_backbone,
        }


@dataclass
class InteractionTrace:
    p_t: float
    p_v: float
    t_hat: np.ndarray
    v_hat: np.ndarray
    fused: np.ndarray


@dataclass
class ViewOutputs:
    y_t: Tensor
    y_v: Tensor
    y_f: Tensor
    y_o: Tensor
    interaction_attention: np.ndarray | None = None  # (heads, L, L)
    trace: InteractionTrace | None = None


def aggregate(y_t: Tensor, y_v: Tensor, y_f: Tensor) -> Tensor:
    """Late fusion: elementwise sum of the three view distributions."""
    return (y_t + y_v) + y_f


def predict(y_o) -> int:
    """Argmax class; an exact tie goes to class 0 (not sarcastic)."""
    arr = y_o.data if isinstance(y_o, Tensor) else np.asarray(y_o)
    return int(np.argmax(arr))


def joint_loss(
    outputs: ViewOutputs,
    gold: int,
    enabled=VIEWS,
    counter: ClampCounter | None = None,
) -> Tensor:
    """Sum of binary cross-entropy terms over the enabled views.

    Each view's positive-class probability is its distribution's index-1
    entry; the same gold label feeds all views. Probabilities are clamped at
    1e-12 before the log and clamps are counted.
    """
    if gold not in (0, 1):
        raise ArgumentError(f"gold label must be 0 or 1, got {gold!r}")
    if not enabled:
        raise ArgumentError("at least one view loss must be enabled")
    by_view = {"t": outputs.y_t, "v": outputs.y_v, "f": outputs.y_f}
    total = None
    for view in enabled:
        if view not in by_view:
            raise ArgumentError(f"unknown view {view!r}")
        p_pos = by_view[view][1]
        term = clamped_log(p_pos if gold == 1 else (1.0 - p_pos), counter=counter)
        total = term if total is None else total + term
    return -total


def _attention_param_specs(prefix: str, d: int):
    return [
        ParamSpec(f"{prefix}.wq", (d, d)),
        ParamSpec(f"{prefix}.bq", (d,), init="zeros"),
        ParamSpec(f"{prefix}.wk", (d, d)),
        ParamSpec(f"{prefix}.bk", (d,), init="zeros"),
        ParamSpec(f"{prefix}.wv", (d, d)),
        ParamSpec(f"{prefix}.bv", (d,), init="zeros"),
        ParamSpec(f"{prefix}.wo", (d, d)),
        ParamSpec(f"{prefix}.bo", (d,), init="zeros"),
    ]


class FusionModel:
    """Owns the parameter store and runs one sample through all three views."""

    def __init__(self, provider, config: ModelConfig):
        if provider.d != config.d:
            raise ConfigurationError(
                f"provider width {provider.d} != configured width {config.d}"
            )
        self.provider = provider
        self.config = config
        d = config.d
        specs = [
            ParamSpec("clf_text.w", (2, d)),
            ParamSpec("clf_text.b", (2,), init="zeros"),
            ParamSpec("clf_image.w", (2, d)),
            ParamSpec("clf_image.b", (2,), init="zeros"),
            ParamSpec("keyless.w", (d,)),
            ParamSpec("keyless.b", (1,), init="zeros"),
        ]
        kind = config.interaction_kind
        if kind == "transformer":
            specs += block_param_specs("inter", d, config.ffn_hidden)
            specs += [ParamSpec("clf_inter.w", (2, d)), ParamSpec("clf_inter.b", (2,), init="zeros")]
        elif kind == "cross_attention":
            specs += _attention_param_specs("cross", d)
            specs += [ParamSpec("clf_inter.w", (2, d)), ParamSpec("clf_inter.b", (2,), init="zeros")]
        else:  # mlp
            specs += [
                ParamSpec("mlp.w1", (config.mlp_hidden, 2 * d)),
                ParamSpec("mlp.b1", (config.mlp_hidden,), init="zeros"),
                ParamSpec("clf_inter.w", (2, config.mlp_hidden)),
                ParamSpec("clf_inter.b", (2,), init="zeros"),
            ]
        self.store = init_params(specs, config.param_seed)
        provider.register_params(self.store)
        if not config.trainable_backbone:
            for group in self.store.groups():
                if group.endswith("backbone"):
                    self.store.freeze_group(group)

    # views ---------------------------------------------------------------
    def text_view(self, enc: TextEncoding) -> Tensor:
        return softmax(linear(enc.cls, self.store["clf_text.w"], self.store["clf_text.b"]), axis=0)

    def image_view(self, enc: ImageEncoding) -> Tensor:
        return softmax(linear(enc.cls, self.store["clf_image.w"], self.store["clf_image.b"]), axis=0)

    def _keyless_fuse(self, t_hat: Tensor, v_hat: Tensor):
        """Shared scalar score per CLS vector, softmaxed across the two modalities."""
        w, b = self.store["keyless.w"], self.store["keyless.b"]
        s_t = reshape(matmul(w, t_hat), (1,)) + b
        s_v = reshape(matmul(w, v_hat), (1,)) + b
        p = softmax(concat([s_t, s_v], axis=0), axis=0)
        f = p[0] * t_hat + p[1] * v_hat
        return f, p

    def interaction_view(self, t_enc: TextEncoding, i_enc: ImageEncoding):
        kind = self.config.interaction_kind
        if kind == "transformer":
            return self._interaction_transformer(t_enc, i_enc)
        if kind == "cross_attention":
            return self._interaction_cross(t_enc, i_enc)
        return self._interaction_mlp(t_enc, i_enc)

    def _classify_inter(self, f: Tensor) -> Tensor:
        return softmax(linear(f, self.store["clf_inter.w"], self.store["clf_inter.b"]), axis=0)

    def _interaction_transformer(self, t_enc, i_enc):
        d = self.config.d
        seq = concat(
            [
                reshape(i_enc.cls, (1, d)),
                i_enc.patch_reps,
                t_enc.token_reps,
                reshape(t_enc.cls, (1, d)),
            ],
            axis=0,
        )
        updated, attn = transformer_encoder_block(seq, self.store, "inter", self.config.heads)
        length = seq.shape[0]
        v_hat = updated[0]
        t_hat = updated[length - 1]
        f, p = self._keyless_fuse(t_hat, v_hat)
        y_f = self._classify_inter(f)
        trace = InteractionTrace(
            p_t=float(p.data[0]), p_v=float(p.data[1]),
            t_hat=t_hat.data.copy(), v_hat=v_hat.data.copy(), fused=f.data.copy(),
        )
        return y_f, attn, trace

    def _interaction_cross(self, t_enc, i_enc):
        # queries carry the modality's full sequence (content + CLS); keys and
        # values come from the other modality's content positions only
        if t_enc.n < 1:
            raise DimensionError("cross attention needs at least one text token")
        d = self.config.d
        text_q = concat([t_enc.token_reps, reshape(t_enc.cls, (1, d))], axis=0)
        image_q = concat([reshape(i_enc.cls, (1, d)), i_enc.patch_reps], axis=0)
        text_upd, _ = multi_head_attention(
            text_q, i_enc.patch_reps, self.store, "cross", self.config.heads
        )
        image_upd, _ = multi_head_attention(
            image_q, t_enc.token_reps, self.store, "cross", self.config.heads
        )
        t_hat = text_upd[t_enc.n]
        v_hat = image_upd[0]
        f, p = self._keyless_fuse(t_hat, v_hat)
        y_f = self._classify_inter(f)
        trace = InteractionTrace(
            p_t=float(p.data[0]), p_v=float(p.data[1]),
            t_hat=t_hat.data.copy(), v_hat=v_hat.data.copy(), fused=f.data.copy(),
        )
        return y_f, None, trace

    def _interaction_mlp(self, t_enc, i_enc):
        z = concat([t_enc.cls, i_enc.cls], axis=0)
        hidden = relu(linear(z, self.store["mlp.w1"], self.store["mlp.b1"]))
        y_f = self._classify_inter(hidden)
        return y_f, None, None

    def forward(self, sample: Sample) -> ViewOutputs:
        t_enc, i_enc = self.provider.encode(sample, self.store)
        y_t = self.text_view(t_enc)
        y_v = self.image_view(i_enc)
        y_f, attn, trace = self.interaction_view(t_enc, i_enc)
        return ViewOutputs(
            y_t=y_t, y_v=y_v, y_f=y_f,
            y_o=aggregate(y_t, y_v, y_f),
            interaction_attention=attn,
            trace=trace,
        )

    def predict_sample(self, sample: Sample) -> int:
        return predict(self.forward(sample).y_o)
