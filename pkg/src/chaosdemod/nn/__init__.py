"""From-scratch numpy CNN for window classification."""
from .functional import (
    BatchNormState,
    batchnorm_backward,
    batchnorm_forward,
    conv1d_backward,
    conv1d_forward,
    cross_entropy,
    dense_forward,
    relu,
    softmax,
)
from .io import WeightsFormatError, load_weights, save_weights
from .model import Model, ModelConfig, build_model, param_counts
from .optim import AdamState, adam_step
from .train import TrainConfig, evaluate, fit

__all__ = [
    "AdamState", "BatchNormState", "Model", "ModelConfig", "TrainConfig", "WeightsFormatError",
    "adam_step", "batchnorm_backward", "batchnorm_forward", "build_model", "conv1d_backward",
    "conv1d_forward", "cross_entropy", "dense_forward", "evaluate", "fit", "load_weights",
    "param_counts", "relu", "save_weights", "softmax",
]
