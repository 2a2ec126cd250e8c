"""
Neural-network engine for the error maps
"""

from .layers import ConvLayer, DenseLayer, conv_forward, relu
from .network import (
    Batch,
    ErrorMapNetwork,
    Gradients,
    append_fc_layer,
    build_network,
    freeze_all,
    gradients,
    loss,
    network_forward,
)
from .training import TrainConfig, TrainingResult, train

__all__ = [
    "Batch",
    "ConvLayer",
    "DenseLayer",
    "ErrorMapNetwork",
    "Gradients",
    "TrainConfig",
    "TrainingResult",
    "append_fc_layer",
    "build_network",
    "conv_forward",
    "freeze_all",
    "gradients",
    "loss",
    "network_forward",
    "relu",
    "train",
]
