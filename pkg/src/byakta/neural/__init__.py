from .gradcheck import grad_check
from .optim import OptimizerState, adam_step
from .params import ParameterSet, fan_in_uniform
from .tensor import (Tensor, absolute, add, backward, bce_with_logits, concat, conv1d, embedding, highway, matmul,
                     mean, mul, narrow, no_grad, relu, reshape, sigmoid, softmax, split, sub, sum_, transpose,
                     transposed_conv1d)

__all__ = [
    "OptimizerState", "ParameterSet", "Tensor", "absolute", "adam_step", "add", "backward", "bce_with_logits",
    "concat", "conv1d", "embedding", "fan_in_uniform", "grad_check", "highway", "matmul", "mean", "mul", "narrow",
    "no_grad", "relu", "reshape", "sigmoid", "softmax", "split", "sub", "sum_", "transpose", "transposed_conv1d",
]
