"""Adam optimizer with bias-corrected moment estimates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from spoofguard.errors import ConfigurationError, ShapeMismatchError
from spoofguard.helpers.config import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPS,
    FINETUNE_LEARNING_RATE,
    LEARNING_RATE,
)
from spoofguard.neuralnet.tensor import ACCUMULATE_DTYPE


@dataclass
class AdamState:
    """Step counter, hyper-parameters and per-parameter moment accumulators."""

    lr: float = LEARNING_RATE
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS
    step: int = 0
    first_moments: dict[str, np.ndarray] = field(default_factory=dict)
    second_moments: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Validate the hyper-parameters."""
        if self.lr <= 0:
            message = f"learning rate must be positive, got {self.lr}"
            raise ConfigurationError(message)
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            message = "Adam betas must lie in [0, 1)"
            raise ConfigurationError(message)

    @classmethod
    def finetune(cls) -> AdamState:
        """The small learning-rate preset for adapting externally supplied weights."""
        return cls(lr=FINETUNE_LEARNING_RATE)


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray | None],
    state: AdamState,
) -> dict[str, np.ndarray]:
    """One Adam update; returns new parameter arrays and advances `state`.

    A missing gradient counts as zero.
    """
    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step

    updated = {}
    for name, value in params.items():
        grad = grads.get(name)
        grad = np.zeros(value.shape) if grad is None else np.asarray(grad, dtype=ACCUMULATE_DTYPE)
        if grad.shape != value.shape:
            message = f"gradient for {name} has shape {grad.shape}, parameter {value.shape}"
            raise ShapeMismatchError(message)

        first = state.first_moments.get(name)
        second = state.second_moments.get(name)
        if first is None:
            first = np.zeros(value.shape, dtype=ACCUMULATE_DTYPE)
            second = np.zeros(value.shape, dtype=ACCUMULATE_DTYPE)
        elif first.shape != value.shape:
            message = f"moment for {name} has shape {first.shape}, parameter {value.shape}"
            raise ShapeMismatchError(message)

        first = state.beta1 * first + (1.0 - state.beta1) * grad
        second = state.beta2 * second + (1.0 - state.beta2) * grad * grad
        state.first_moments[name] = first
        state.second_moments[name] = second

        m_hat = first / correction1
        v_hat = second / correction2
        delta = state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
        updated[name] = (value.astype(ACCUMULATE_DTYPE) - delta).astype(value.dtype)

    return updated
