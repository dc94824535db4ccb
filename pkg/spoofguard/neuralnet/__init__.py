"""Tensor/autograd engine and the residual CNN classifier.

Modules:
    - tensor: Tensor with reverse-mode differentiation.
    - functional: conv2d, batchnorm2d, relu, pooling, linear, softmax cross-entropy.
    - model: NetworkConfig, residual blocks, build_network and scoring.
    - optim: AdamState and adam_step.
    - training: TrainRunConfig and the training loop.
    - weights: the SGW1 weight file format.
"""

from spoofguard.neuralnet.functional import (
    BatchNormState,
    batchnorm2d,
    conv2d,
    global_avg_pool,
    linear,
    maxpool2d,
    relu,
    softmax_cross_entropy,
)
from spoofguard.neuralnet.model import (
    BlockParams,
    ConvBN,
    NetworkConfig,
    ResNet,
    build_network,
    class_posteriors,
    count_weighted_layers,
    residual_block,
    score_batch,
    score_utterance,
    spectrogram_input,
)
from spoofguard.neuralnet.optim import AdamState, adam_step
from spoofguard.neuralnet.tensor import Tensor, parameter
from spoofguard.neuralnet.training import FeatureDataset, TrainHistory, TrainRunConfig, train
from spoofguard.neuralnet.weights import load_weights, save_weights

__all__ = [
    "AdamState",
    "BatchNormState",
    "BlockParams",
    "ConvBN",
    "FeatureDataset",
    "NetworkConfig",
    "ResNet",
    "Tensor",
    "TrainHistory",
    "TrainRunConfig",
    "adam_step",
    "batchnorm2d",
    "build_network",
    "class_posteriors",
    "conv2d",
    "count_weighted_layers",
    "global_avg_pool",
    "linear",
    "load_weights",
    "maxpool2d",
    "parameter",
    "relu",
    "residual_block",
    "save_weights",
    "score_batch",
    "score_utterance",
    "softmax_cross_entropy",
    "spectrogram_input",
    "train",
]
