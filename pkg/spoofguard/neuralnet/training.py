"""Mini-batch training of the classifier with Adam."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from spoofguard.errors import ConfigurationError, DatasetError
from spoofguard.helpers.config import BATCH_SIZE, EPOCHS, SEED
from spoofguard.metrics import ScoreSet, compute_eer
from spoofguard.neuralnet.functional import softmax_cross_entropy
from spoofguard.neuralnet.model import ResNet, score_batch
from spoofguard.neuralnet.optim import AdamState, adam_step
from spoofguard.neuralnet.weights import save_weights

if TYPE_CHECKING:
    from spoofguard.helpers.managers.live_manager import LiveManager

BONAFIDE_LABEL = 1
SPOOF_LABEL = 0


@dataclass(frozen=True)
class TrainRunConfig:
    """Epochs, batch size, shuffling seed and the per-epoch checkpoint path."""

    epochs: int = EPOCHS
    batch_size: int = BATCH_SIZE
    seed: int = SEED
    checkpoint_path: Path | None = None

    def __post_init__(self) -> None:
        """Reject empty runs."""
        if self.epochs < 1 or self.batch_size < 1:
            message = f"epochs and batch_size must be positive, got {self.epochs}/{self.batch_size}"
            raise ConfigurationError(message)


@dataclass(frozen=True)
class FeatureDataset:
    """Network-ready inputs (N, C, H, W) with labels 0 = spoof, 1 = bonafide."""

    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        """Check that inputs and labels align."""
        if self.inputs.shape[0] != self.labels.shape[0]:
            message = f"{self.inputs.shape[0]} inputs but {self.labels.shape[0]} labels"
            raise DatasetError(message)

    def __len__(self) -> int:
        """Number of utterances."""
        return int(self.labels.shape[0])


@dataclass
class TrainHistory:
    """Mean training loss per epoch and, when a dev set is given, dev EER per epoch."""

    losses: list[float] = field(default_factory=list)
    dev_eers: list[float] = field(default_factory=list)


def _validate_dataset(dataset: FeatureDataset) -> None:
    if len(dataset) == 0:
        message = "training dataset is empty"
        raise DatasetError(message)

    present = set(np.unique(dataset.labels).tolist())
    if present != {SPOOF_LABEL, BONAFIDE_LABEL}:
        message = f"training needs both bonafide and spoof utterances, found labels {sorted(present)}"
        raise DatasetError(message)


def evaluate_eer(model: ResNet, dataset: FeatureDataset, batch_size: int = BATCH_SIZE) -> float:
    """EER of the eval-mode model on a labeled dataset."""
    _validate_dataset(dataset)
    scores = np.concatenate(
        [
            score_batch(model, dataset.inputs[start:start + batch_size])
            for start in range(0, len(dataset), batch_size)
        ],
    )
    score_set = ScoreSet(
        bonafide_scores=scores[dataset.labels == BONAFIDE_LABEL],
        spoof_scores=scores[dataset.labels == SPOOF_LABEL],
    )
    return compute_eer(score_set).eer


def train(
    model: ResNet,
    dataset: FeatureDataset,
    run: TrainRunConfig | None = None,
    opt: AdamState | None = None,
    dev_dataset: FeatureDataset | None = None,
    live_manager: LiveManager | None = None,
) -> tuple[ResNet, TrainHistory]:
    """Train in place with seeded per-epoch shuffling; returns the model and its history."""
    run = run or TrainRunConfig()
    opt = opt or AdamState()
    _validate_dataset(dataset)

    rng = np.random.default_rng(run.seed)
    history = TrainHistory()
    batches_per_epoch = -(-len(dataset) // run.batch_size)
    if live_manager is not None:
        live_manager.start_stage("Training", run.epochs)

    for epoch in range(run.epochs):
        order = rng.permutation(len(dataset))
        unit_id = live_manager.start_unit(epoch + 1, batches_per_epoch) if live_manager else None
        weighted_loss = 0.0

        for start in range(0, len(dataset), run.batch_size):
            indices = order[start:start + run.batch_size]
            model.zero_grad()
            loss = softmax_cross_entropy(
                model.forward(dataset.inputs[indices], mode="train"),
                dataset.labels[indices],
            )
            loss.backward()
            weighted_loss += float(loss.data) * indices.size

            trainable = model.trainable_parameters()
            updated = adam_step(
                {name: tensor.data for name, tensor in trainable.items()},
                {name: tensor.grad for name, tensor in trainable.items()},
                opt,
            )
            for name, value in updated.items():
                trainable[name].data = value

            if unit_id is not None:
                live_manager.advance_unit(unit_id)

        history.losses.append(weighted_loss / len(dataset))
        details = f"epoch {epoch + 1}/{run.epochs} loss={history.losses[-1]:.6f}"
        if dev_dataset is not None and len(dev_dataset):
            history.dev_eers.append(evaluate_eer(model, dev_dataset, run.batch_size))
            details += f" dev_eer={100 * history.dev_eers[-1]:.4f}%"

        logging.info(details)
        if run.checkpoint_path is not None:
            save_weights(model, run.checkpoint_path)
        if live_manager is not None:
            live_manager.update_log("Epoch finished", details)
            live_manager.advance_stage()

    model.zero_grad()
    return model, history
