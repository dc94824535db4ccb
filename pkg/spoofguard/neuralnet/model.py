"""Residual CNN classifier for bona fide / spoof decisions.

The topology follows ResNet-34: a 7x7 stride-2 stem with max pooling, four stages
of basic residual blocks (the first block of stages 2-4 halves the spatial size and
doubles the channels through a 1x1 projection shortcut), global average pooling and
a two-way linear classifier.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from spoofguard.errors import ConfigurationError, ShapeMismatchError
from spoofguard.features.types import MelSpectrogram
from spoofguard.helpers.config import (
    NUM_CLASSES,
    RESNET34_BASE_CHANNELS,
    RESNET34_BLOCKS,
    RESNET34_INPUT_HW,
    SEED,
    TINY_BASE_CHANNELS,
    TINY_BLOCKS,
    TINY_INPUT_HW,
)
from spoofguard.neuralnet.functional import (
    BatchNormState,
    batchnorm2d,
    conv2d,
    global_avg_pool,
    linear,
    log_softmax,
    maxpool2d,
    relu,
)
from spoofguard.neuralnet.tensor import STORAGE_DTYPE, Tensor, parameter

PRESETS = {
    "resnet34": (RESNET34_BLOCKS, RESNET34_BASE_CHANNELS, RESNET34_INPUT_HW),
    "tiny": (TINY_BLOCKS, TINY_BASE_CHANNELS, TINY_INPUT_HW),
}


@dataclass(frozen=True)
class NetworkConfig:
    """Shape of the classifier.

    `in_channels=3` replicates the single spectrogram plane so externally supplied
    image-pretrained weights can be loaded.
    """

    stage_block_counts: tuple[int, ...] = RESNET34_BLOCKS
    base_channels: int = RESNET34_BASE_CHANNELS
    input_hw: int = RESNET34_INPUT_HW
    num_classes: int = NUM_CLASSES
    in_channels: int = 1
    preset: str = "resnet34"

    def __post_init__(self) -> None:
        """Validate block counts, widths and the class count."""
        object.__setattr__(self, "stage_block_counts", tuple(int(c) for c in self.stage_block_counts))
        if len(self.stage_block_counts) != 4 or min(self.stage_block_counts) < 1:
            message = f"need 4 stages with at least one block each, got {self.stage_block_counts}"
            raise ConfigurationError(message)
        if self.base_channels < 1:
            message = f"base_channels must be positive, got {self.base_channels}"
            raise ConfigurationError(message)
        if self.num_classes != NUM_CLASSES:
            message = f"the classifier is binary, num_classes must be {NUM_CLASSES}"
            raise ConfigurationError(message)
        if self.in_channels not in (1, 3):
            message = f"in_channels must be 1 or 3, got {self.in_channels}"
            raise ConfigurationError(message)
        if self.input_hw < 32:
            message = f"input_hw must be at least 32 for five stride-2 reductions, got {self.input_hw}"
            raise ConfigurationError(message)

    @classmethod
    def from_preset(cls, name: str, in_channels: int = 1) -> NetworkConfig:
        """`resnet34` or `tiny`."""
        if name not in PRESETS:
            message = f"unknown preset {name!r}, choose from {sorted(PRESETS)}"
            raise ConfigurationError(message)

        blocks, base, input_hw = PRESETS[name]
        return cls(blocks, base, input_hw, NUM_CLASSES, in_channels, name)


@dataclass
class ConvBN:
    """A bias-free convolution followed by batch normalization."""

    weight: Tensor
    gamma: Tensor
    beta: Tensor
    state: BatchNormState
    stride: int = 1

    def __call__(self, x: Tensor, mode: str) -> Tensor:
        """Convolve with 'same' padding for odd kernels, then normalize."""
        padding = self.weight.shape[-1] // 2
        return batchnorm2d(
            conv2d(x, self.weight, stride=self.stride, padding=padding),
            self.gamma,
            self.beta,
            self.state,
            mode,
        )


@dataclass
class BlockParams:
    """Parameters of one basic residual block."""

    conv1: ConvBN
    conv2: ConvBN
    shortcut: ConvBN | None = None


def residual_block(x: Tensor, params: BlockParams, downsample: bool, mode: str = "train") -> Tensor:
    """y = ReLU(F(x) + shortcut(x)) with F = conv3x3-BN-ReLU-conv3x3-BN."""
    if downsample != (params.shortcut is not None):
        message = "a downsampling block needs a projection shortcut and vice versa"
        raise ConfigurationError(message)

    residual = params.conv2(relu(params.conv1(x, mode)), mode)
    shortcut = params.shortcut(x, mode) if downsample else x
    if residual.shape != shortcut.shape:
        message = f"residual path {residual.shape} does not match shortcut {shortcut.shape}"
        raise ShapeMismatchError(message)

    return relu(residual + shortcut)


@dataclass
class ResNet:
    """A built classifier: named parameters, batch-norm statistics and topology."""

    config: NetworkConfig
    stem: ConvBN
    stages: list[list[BlockParams]]
    fc_weight: Tensor
    fc_bias: Tensor
    frozen: set[str] = field(default_factory=set)

    def forward(self, batch: np.ndarray | Tensor, mode: str = "train") -> Tensor:
        """Logits (N, 2) for an (N, C, H, W) batch."""
        x = batch if isinstance(batch, Tensor) else Tensor(batch, dtype=self.fc_weight.dtype)
        expected = (self.config.in_channels, self.config.input_hw, self.config.input_hw)
        if x.data.ndim != 4 or x.shape[1:] != expected:
            message = f"model expects (N, {', '.join(map(str, expected))}) input, got {x.shape}"
            raise ShapeMismatchError(message)

        # A frozen backbone keeps its running statistics.
        backbone_mode = "eval" if self.backbone_frozen else mode
        x = maxpool2d(relu(self.stem(x, backbone_mode)))
        for stage_index, blocks in enumerate(self.stages):
            for block_index, block in enumerate(blocks):
                downsample = stage_index > 0 and block_index == 0
                x = residual_block(x, block, downsample, backbone_mode)

        return linear(global_avg_pool(x), self.fc_weight, self.fc_bias)

    @property
    def backbone_frozen(self) -> bool:
        """True once `freeze_backbone` has run."""
        return "stem.weight" in self.frozen

    def conv_bns(self) -> Iterator[tuple[str, ConvBN]]:
        """Every conv+BN unit with its name prefix, in network order."""
        yield "stem", self.stem
        for stage_index, blocks in enumerate(self.stages, start=1):
            for block_index, block in enumerate(blocks):
                prefix = f"layer{stage_index}.{block_index}"
                yield f"{prefix}.conv1", block.conv1
                yield f"{prefix}.conv2", block.conv2
                if block.shortcut is not None:
                    yield f"{prefix}.downsample", block.shortcut

    def parameters(self) -> dict[str, Tensor]:
        """Trainable tensors keyed by their stable names."""
        named = {}
        for prefix, unit in self.conv_bns():
            named[f"{prefix}.weight"] = unit.weight
            named[f"{prefix}.bn.gamma"] = unit.gamma
            named[f"{prefix}.bn.beta"] = unit.beta
        named["fc.weight"] = self.fc_weight
        named["fc.bias"] = self.fc_bias
        return named

    def trainable_parameters(self) -> dict[str, Tensor]:
        """Parameters not listed in `frozen`."""
        return {name: p for name, p in self.parameters().items() if name not in self.frozen}

    def buffers(self) -> dict[str, np.ndarray]:
        """Batch-norm running statistics keyed by name."""
        named = {}
        for prefix, unit in self.conv_bns():
            named[f"{prefix}.bn.running_mean"] = unit.state.running_mean
            named[f"{prefix}.bn.running_var"] = unit.state.running_var
        return named

    def zero_grad(self) -> None:
        """Clear every parameter gradient."""
        for tensor in self.parameters().values():
            tensor.zero_grad()

    def freeze_backbone(self) -> None:
        """Train only the classifier layer; batch norms below it run on their running statistics."""
        self.frozen = {name for name in self.parameters() if not name.startswith("fc.")}


def _he_normal(rng: np.random.Generator, shape: tuple[int, ...], dtype: type) -> np.ndarray:
    fan_in = int(np.prod(shape[1:]))
    return (rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)).astype(dtype)


def _conv_bn(
    rng: np.random.Generator,
    in_channels: int,
    out_channels: int,
    kernel: int,
    stride: int,
    dtype: type,
) -> ConvBN:
    return ConvBN(
        weight=parameter(_he_normal(rng, (out_channels, in_channels, kernel, kernel), dtype), "weight"),
        gamma=parameter(np.ones(out_channels, dtype=dtype), "gamma"),
        beta=parameter(np.zeros(out_channels, dtype=dtype), "beta"),
        state=BatchNormState.initial(out_channels, dtype),
        stride=stride,
    )


def build_network(
    cfg: NetworkConfig,
    seed: int = SEED,
    dtype: type = STORAGE_DTYPE,
) -> ResNet:
    """Instantiate a seeded, He-initialized network for a configuration."""
    rng = np.random.default_rng(seed)
    base = cfg.base_channels
    stem = _conv_bn(rng, cfg.in_channels, base, 7, 2, dtype)

    stages = []
    in_channels = base
    for stage_index, block_count in enumerate(cfg.stage_block_counts):
        out_channels = base * 2**stage_index
        blocks = []
        for block_index in range(block_count):
            downsample = stage_index > 0 and block_index == 0
            stride = 2 if downsample else 1
            blocks.append(
                BlockParams(
                    conv1=_conv_bn(rng, in_channels, out_channels, 3, stride, dtype),
                    conv2=_conv_bn(rng, out_channels, out_channels, 3, 1, dtype),
                    shortcut=_conv_bn(rng, in_channels, out_channels, 1, 2, dtype) if downsample else None,
                ),
            )
            in_channels = out_channels
        stages.append(blocks)

    bound = 1.0 / np.sqrt(in_channels)
    fc_weight = rng.uniform(-bound, bound, (cfg.num_classes, in_channels)).astype(dtype)
    model = ResNet(
        config=cfg,
        stem=stem,
        stages=stages,
        fc_weight=parameter(fc_weight, "fc.weight"),
        fc_bias=parameter(np.zeros(cfg.num_classes, dtype=dtype), "fc.bias"),
    )
    for name, tensor in model.parameters().items():
        tensor.name = name
    return model


def count_weighted_layers(model: ResNet) -> int:
    """Stem conv + residual-path convs + classifier; projection shortcuts excluded."""
    residual_convs = sum(2 * len(blocks) for blocks in model.stages)
    return 1 + residual_convs + 1


def spectrogram_input(spectrograms: list[MelSpectrogram], in_channels: int = 1) -> np.ndarray:
    """Stack dB grids into an (N, C, H, W) batch rescaled from [db_floor, 0] to [0, 1]."""
    planes = [
        (spec.values.astype(np.float64) - spec.config.db_floor) / (0.0 - spec.config.db_floor)
        for spec in spectrograms
    ]
    batch = np.stack(planes)[:, np.newaxis].astype(STORAGE_DTYPE)
    return np.repeat(batch, in_channels, axis=1) if in_channels > 1 else batch


def class_posteriors(model: ResNet, batch: np.ndarray) -> np.ndarray:
    """Softmax of the eval-mode logits, columns (spoof, bonafide)."""
    return np.exp(log_softmax(model.forward(batch, mode="eval").data))


def score_batch(model: ResNet, batch: np.ndarray) -> np.ndarray:
    """Detection scores logit(bonafide) - logit(spoof) in eval mode."""
    logits = model.forward(batch, mode="eval").data.astype(np.float64)
    return logits[:, 1] - logits[:, 0]


def score_utterance(model: ResNet, features: MelSpectrogram) -> float:
    """Detection score of one utterance; higher means more bona fide."""
    batch = spectrogram_input([features], model.config.in_channels)
    return float(score_batch(model, batch)[0])
