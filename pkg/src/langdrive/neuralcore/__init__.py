"""Minimal reverse-mode autodiff and the layer set the driving models are built from."""

from .tensor import Tensor, backward, no_grad, set_default_dtype, get_default_dtype
from .ops import (
    add, mul, matmul, dense, conv2d, elu, sigmoid, tanh,
    softmax, log_softmax, concat, reshape, getitem, reduce_sum, reduce_mean,
    gru_step, masked_gru_step, luong_attention, channel_gate, gated_attention, embed,
)
from .losses import l1_loss, bce_loss, ce_loss, BCE_EPS
from .optim import Adam
from .params import (
    ParamSet, save_params, load_params, uniform_init, embedding_init,
    add_dense, add_conv, add_gru, gru_view,
)
from .gradcheck import finite_difference_check

__all__ = [
    "Tensor", "backward", "no_grad", "set_default_dtype", "get_default_dtype",
    "add", "mul", "matmul", "dense", "conv2d", "elu", "sigmoid", "tanh",
    "softmax", "log_softmax", "concat", "reshape", "getitem", "reduce_sum", "reduce_mean",
    "gru_step", "masked_gru_step", "luong_attention", "channel_gate", "gated_attention",
    "embed", "l1_loss", "bce_loss", "ce_loss", "BCE_EPS", "Adam",
    "ParamSet", "save_params", "load_params", "uniform_init", "embedding_init",
    "add_dense", "add_conv", "add_gru", "gru_view", "finite_difference_check",
]
