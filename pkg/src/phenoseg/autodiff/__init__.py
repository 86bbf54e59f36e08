"""Minimal dense-tensor engine with reverse-mode autodiff."""

from .gradcheck import grad_check
from .module import Module, Parameter, conv_init, dense_init, glorot_uniform
from .ops import (add, bilinear_upsample, broadcast_to, concat, conv2d, dense,
                  depthwise_conv1d, div, embedding, exp, getitem, layer_norm,
                  log, matmul, maximum, mean, mul, neg, relu, reshape, sigmoid,
                  softmax, sub, sum_, tanh, transpose)
from .tensor import Tensor, as_tensor, set_debug_checks

__all__ = [
    "Tensor", "as_tensor", "set_debug_checks", "grad_check",
    "Module", "Parameter", "glorot_uniform", "dense_init", "conv_init",
    "add", "sub", "mul", "div", "neg", "exp", "log", "relu", "sigmoid", "tanh",
    "sum_", "mean", "reshape", "transpose", "getitem", "concat", "matmul", "broadcast_to",
    "dense", "embedding", "softmax", "layer_norm", "conv2d", "depthwise_conv1d",
    "bilinear_upsample", "maximum",
]
