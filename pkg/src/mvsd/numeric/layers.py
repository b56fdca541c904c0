"""Attention primitives and a post-norm transformer encoder block."""
from __future__ import annotations

import math

import numpy as np

from ..errors import DimensionError
from .params import ParamSpec, ParamStore
from .tensor import Tensor, concat, layer_norm, linear, matmul, mul, relu, softmax, transpose


def scaled_dot_product_attention(q: Tensor, k: Tensor, v: Tensor, d_k: int | None = None):
    """softmax(q kᵀ / sqrt(d_k)) v for q (n_q, d_k), k (n_k, d_k), v (n_k, d_v).

    Returns (output, attention) where attention rows sum to 1.
    """
    if q.ndim != 2 or k.ndim != 2 or v.ndim != 2:
        raise DimensionError("attention expects matrices")
    if q.shape[1] != k.shape[1] or k.shape[0] != v.shape[0]:
        raise DimensionError(
            f"attention shape mismatch: q {q.shape}, k {k.shape}, v {v.shape}"
        )
    if d_k is None:
        d_k = q.shape[1]
    scores = mul(matmul(q, transpose(k)), Tensor(1.0 / math.sqrt(d_k)))
    attn = softmax(scores, axis=-1)
    return matmul(attn, v), attn


def block_param_specs(prefix: str, d: int, hidden: int, group: str = "head"):
    """Parameter layout of one encoder block (post-norm, relu feed-forward)."""
    return [
        ParamSpec(f"{prefix}.wq", (d, d), group),
        ParamSpec(f"{prefix}.bq", (d,), group, "zeros"),
        ParamSpec(f"{prefix}.wk", (d, d), group),
        ParamSpec(f"{prefix}.bk", (d,), group, "zeros"),
        ParamSpec(f"{prefix}.wv", (d, d), group),
        ParamSpec(f"{prefix}.bv", (d,), group, "zeros"),
        ParamSpec(f"{prefix}.wo", (d, d), group),
        ParamSpec(f"{prefix}.bo", (d,), group, "zeros"),
        ParamSpec(f"{prefix}.ln1_g", (d,), group, "ones"),
        ParamSpec(f"{prefix}.ln1_b", (d,), group, "zeros"),
        ParamSpec(f"{prefix}.ffn_w1", (hidden, d), group),
        ParamSpec(f"{prefix}.ffn_b1", (hidden,), group, "zeros"),
        ParamSpec(f"{prefix}.ffn_w2", (d, hidden), group),
        ParamSpec(f"{prefix}.ffn_b2", (d,), group, "zeros"),
        ParamSpec(f"{prefix}.ln2_g", (d,), group, "ones"),
        ParamSpec(f"{prefix}.ln2_b", (d,), group, "zeros"),
    ]


def multi_head_attention(
    q_seq: Tensor,
    kv_seq: Tensor,
    store: ParamStore,
    prefix: str,
    heads: int,
):
    """Project, split into heads along the feature axis, attend, re-project.

    Returns (output (L_q, d), attention ndarray (heads, L_q, L_kv)).
    """
    d = q_seq.shape[1]
    if d % heads != 0:
        raise DimensionError(f"model width {d} not divisible by {heads} heads")
    d_head = d // heads
    q = linear(q_seq, store[f"{prefix}.wq"], store[f"{prefix}.bq"])
    k = linear(kv_seq, store[f"{prefix}.wk"], store[f"{prefix}.bk"])
    v = linear(kv_seq, store[f"{prefix}.wv"], store[f"{prefix}.bv"])
    outs = []
    attn = np.empty((heads, q_seq.shape[0], kv_seq.shape[0]))
    for h in range(heads):
        cols = (slice(None), slice(h * d_head, (h + 1) * d_head))
        out_h, attn_h = scaled_dot_product_attention(q[cols], k[cols], v[cols], d_head)
        outs.append(out_h)
        attn[h] = attn_h.data
    merged = concat(outs, axis=1)
    return linear(merged, store[f"{prefix}.wo"], store[f"{prefix}.bo"]), attn


def transformer_encoder_block(
    x: Tensor,
    store: ParamStore,
    prefix: str,
    heads: int,
):
    """Self-attention + residual + layer norm + feed-forward + residual + norm."""
    attended, attn = multi_head_attention(x, x, store, prefix, heads)
    x1 = layer_norm(x + attended, store[f"{prefix}.ln1_g"], store[f"{prefix}.ln1_b"])
    ff = linear(relu(linear(x1, store[f"{prefix}.ffn_w1"], store[f"{prefix}.ffn_b1"])),
                store[f"{prefix}.ffn_w2"], store[f"{prefix}.ffn_b2"])
    out = layer_norm(x1 + ff, store[f"{prefix}.ln2_g"], store[f"{prefix}.ln2_b"])
    return out, attn
