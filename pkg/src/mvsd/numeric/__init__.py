from .tensor import (
    ClampCounter,
    Tensor,
    add,
    clamped_log,
    concat,
    dropout,
    getitem,
    layer_norm,
    linear,
    matmul,
    mean,
    mul,
    relu,
    reshape,
    softmax,
    sub,
    transpose,
    tsum,
)
from .params import ParamSpec, ParamStore, init_params, xavier_bound
from .layers import (
    block_param_specs,
    multi_head_attention,
    scaled_dot_product_attention,
    transformer_encoder_block,
)
from .gradcheck import GradCheckReport, gradient_check

__all__ = [
    "ClampCounter",
    "Tensor",
    "add",
    "clamped_log",
    "concat",
    "dropout",
    "getitem",
    "layer_norm",
    "linear",
    "matmul",
    "mean",
    "mul",
    "relu",
    "reshape",
    "softmax",
    "sub",
    "transpose",
    "tsum",
    "ParamSpec",
    "ParamStore",
    "init_params",
    "xavier_bound",
    "block_param_specs",
    "multi_head_attention",
    "scaled_dot_product_attention",
    "transformer_encoder_block",
    "GradCheckReport",
    "gradient_check",
]
