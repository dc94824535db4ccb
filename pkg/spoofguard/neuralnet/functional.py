"""Differentiable layer operations on NCHW tensors.

Forward passes keep the storage precision of their inputs; matrix products and
statistics are accumulated in float64 and cast back, so float32 networks and
float64 gradient checks share one code path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from spoofguard.errors import ShapeMismatchError
from spoofguard.helpers.config import BN_EPS, BN_MOMENTUM, NUM_CLASSES
from spoofguard.neuralnet.tensor import ACCUMULATE_DTYPE, Tensor


def _pad(x: np.ndarray, padding: int, value: float = 0.0) -> np.ndarray:
    if padding == 0:
        return x
    widths = ((0, 0), (0, 0), (padding, padding), (padding, padding))
    return np.pad(x, widths, mode="constant", constant_values=value)


def _output_size(size: int, kernel: int, stride: int, padding: int) -> int:
    return (size + 2 * padding - kernel) // stride + 1


def _windows(x_padded: np.ndarray, k_h: int, k_w: int, stride: int, out_h: int, out_w: int) -> np.ndarray:
    """Gather (N, C, kH, kW, H', W') patches by strided slicing."""
    n, c = x_padded.shape[:2]
    cols = np.empty((n, c, k_h, k_w, out_h, out_w), dtype=x_padded.dtype)
    for i in range(k_h):
        for j in range(k_w):
            cols[:, :, i, j] = x_padded[
                :, :, i:i + stride * out_h:stride, j:j + stride * out_w:stride
            ]
    return cols


def conv2d(
    x: Tensor,
    weight: Tensor,
    bias: Tensor | None = None,
    stride: int = 1,
    padding: int = 0,
) -> Tensor:
    """2-D cross-correlation of an NCHW input with an (O, C, kH, kW) kernel."""
    if x.data.ndim != 4 or weight.data.ndim != 4:
        message = f"conv2d expects 4-D input and weight, got {x.shape} and {weight.shape}"
        raise ShapeMismatchError(message)
    if x.shape[1] != weight.shape[1]:
        message = f"conv2d input has {x.shape[1]} channels, weight expects {weight.shape[1]}"
        raise ShapeMismatchError(message)
    if bias is not None and bias.shape != (weight.shape[0],):
        message = f"conv2d bias shape {bias.shape} does not match {weight.shape[0]} filters"
        raise ShapeMismatchError(message)
    if stride < 1:
        message = f"stride must be at least 1, got {stride}"
        raise ValueError(message)

    n, c, h, w = x.shape
    out_c, _, k_h, k_w = weight.shape
    out_h = _output_size(h, k_h, stride, padding)
    out_w = _output_size(w, k_w, stride, padding)
    if out_h < 1 or out_w < 1:
        message = f"kernel {k_h}x{k_w} does not fit input {h}x{w} with padding {padding}"
        raise ShapeMismatchError(message)

    cols = _windows(_pad(x.data, padding), k_h, k_w, stride, out_h, out_w)
    cols64 = cols.astype(ACCUMULATE_DTYPE, copy=False)
    weight64 = weight.data.astype(ACCUMULATE_DTYPE, copy=False)
    out = np.tensordot(cols64, weight64, axes=([1, 2, 3], [1, 2, 3]))  # N, H', W', O
    out = out.transpose(0, 3, 1, 2)
    if bias is not None:
        out = out + bias.data.astype(ACCUMULATE_DTYPE)[np.newaxis, :, np.newaxis, np.newaxis]

    def backward(grad: np.ndarray) -> tuple:
        grad64 = grad.astype(ACCUMULATE_DTYPE, copy=False)
        grad_weight = np.tensordot(grad64, cols64, axes=([0, 2, 3], [0, 4, 5]))
        grad_bias = grad64.sum(axis=(0, 2, 3)) if bias is not None else None

        grad_cols = np.tensordot(grad64, weight64, axes=([1], [0]))  # N, H', W', C, kH, kW
        grad_padded = np.zeros((n, c, h + 2 * padding, w + 2 * padding), dtype=ACCUMULATE_DTYPE)
        for i in range(k_h):
            for j in range(k_w):
                grad_padded[
                    :, :, i:i + stride * out_h:stride, j:j + stride * out_w:stride
                ] += grad_cols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
        grad_x = grad_padded[:, :, padding:padding + h, padding:padding + w]
        return grad_x, grad_weight, grad_bias

    parents = (x, weight) if bias is None else (x, weight, bias)
    return Tensor.from_op(out.astype(x.dtype), parents, backward)


@dataclass
class BatchNormState:
    """Running statistics of a batch-norm layer."""

    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = BN_MOMENTUM
    eps: float = BN_EPS
    updates: int = field(default=0)

    @classmethod
    def initial(cls, channels: int, dtype: type = np.float32) -> BatchNormState:
        """Mean 0, variance 1."""
        return cls(np.zeros(channels, dtype=dtype), np.ones(channels, dtype=dtype))


def batchnorm2d(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    state: BatchNormState,
    mode: str = "train",
) -> Tensor:
    """Per-channel batch normalization.

    Train mode normalizes by the biased batch variance and folds the unbiased
    variance into the running estimate; eval mode uses the running statistics.
    """
    channels = x.shape[1]
    if gamma.shape != (channels,) or beta.shape != (channels,):
        message = f"batchnorm parameters {gamma.shape}/{beta.shape} do not match {channels} channels"
        raise ShapeMismatchError(message)
    if state.running_mean.shape != (channels,):
        message = f"running statistics have {state.running_mean.shape[0]} channels, input {channels}"
        raise ShapeMismatchError(message)
    if mode not in ("train", "eval"):
        message = f"mode must be 'train' or 'eval', got {mode!r}"
        raise ValueError(message)

    x64 = x.data.astype(ACCUMULATE_DTYPE, copy=False)
    gamma64 = gamma.data.astype(ACCUMULATE_DTYPE)[np.newaxis, :, np.newaxis, np.newaxis]
    beta64 = beta.data.astype(ACCUMULATE_DTYPE)[np.newaxis, :, np.newaxis, np.newaxis]
    axes = (0, 2, 3)
    count = x64.size // channels

    if mode == "train":
        mean = x64.mean(axis=axes)
        var = x64.var(axis=axes)
        momentum = state.momentum
        unbiased = var * count / max(count - 1, 1)
        state.running_mean[...] = (1 - momentum) * state.running_mean + momentum * mean
        state.running_var[...] = (1 - momentum) * state.running_var + momentum * unbiased
        state.updates += 1
    else:
        mean = state.running_mean.astype(ACCUMULATE_DTYPE)
        var = state.running_var.astype(ACCUMULATE_DTYPE)

    inv_std = 1.0 / np.sqrt(var + state.eps)[np.newaxis, :, np.newaxis, np.newaxis]
    x_hat = (x64 - mean[np.newaxis, :, np.newaxis, np.newaxis]) * inv_std
    out = gamma64 * x_hat + beta64

    def backward(grad: np.ndarray) -> tuple:
        grad64 = grad.astype(ACCUMULATE_DTYPE, copy=False)
        grad_gamma = (grad64 * x_hat).sum(axis=axes)
        grad_beta = grad64.sum(axis=axes)
        grad_x_hat = grad64 * gamma64
        if mode == "train":
            grad_x = inv_std * (
                grad_x_hat
                - grad_x_hat.mean(axis=axes, keepdims=True)
                - x_hat * (grad_x_hat * x_hat).mean(axis=axes, keepdims=True)
            )
        else:
            grad_x = grad_x_hat * inv_std
        return grad_x, grad_gamma, grad_beta

    return Tensor.from_op(out.astype(x.dtype), (x, gamma, beta), backward)


def relu(x: Tensor) -> Tensor:
    """Elementwise max(0, x); the gradient passes only where x > 0."""
    mask = x.data > 0
    return Tensor.from_op(
        np.where(mask, x.data, 0).astype(x.dtype),
        (x,),
        lambda grad: (grad * mask,),
    )


def maxpool2d(x: Tensor, kernel: int = 3, stride: int = 2, padding: int = 1) -> Tensor:
    """Max pooling; ties route the gradient to the first maximal position."""
    n, c, h, w = x.shape
    out_h = _output_size(h, kernel, stride, padding)
    out_w = _output_size(w, kernel, stride, padding)
    cols = _windows(_pad(x.data, padding, -np.inf), kernel, kernel, stride, out_h, out_w)
    flat = cols.reshape(n, c, kernel * kernel, out_h, out_w)
    winners = flat.argmax(axis=2)
    out = np.take_along_axis(flat, winners[:, :, np.newaxis], axis=2)[:, :, 0]

    def backward(grad: np.ndarray) -> tuple:
        grad_padded = np.zeros((n, c, h + 2 * padding, w + 2 * padding), dtype=grad.dtype)
        for position in range(kernel * kernel):
            i, j = divmod(position, kernel)
            routed = np.where(winners == position, grad, 0)
            grad_padded[
                :, :, i:i + stride * out_h:stride, j:j + stride * out_w:stride
            ] += routed
        return (grad_padded[:, :, padding:padding + h, padding:padding + w],)

    return Tensor.from_op(out, (x,), backward)


def global_avg_pool(x: Tensor) -> Tensor:
    """Mean over the spatial axes: (N, C, H, W) -> (N, C)."""
    n, c, h, w = x.shape
    out = x.data.astype(ACCUMULATE_DTYPE).mean(axis=(2, 3))

    def backward(grad: np.ndarray) -> tuple:
        spread = grad[:, :, np.newaxis, np.newaxis] / (h * w)
        return (np.broadcast_to(spread, (n, c, h, w)),)

    return Tensor.from_op(out.astype(x.dtype), (x,), backward)


def linear(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Affine map x @ W.T + b with W of shape (out, in)."""
    if x.data.ndim != 2 or x.shape[1] != weight.shape[1]:
        message = f"linear input {x.shape} does not fit weight {weight.shape}"
        raise ShapeMismatchError(message)
    if bias.shape != (weight.shape[0],):
        message = f"linear bias {bias.shape} does not fit weight {weight.shape}"
        raise ShapeMismatchError(message)

    x64 = x.data.astype(ACCUMULATE_DTYPE, copy=False)
    w64 = weight.data.astype(ACCUMULATE_DTYPE, copy=False)
    out = x64 @ w64.T + bias.data.astype(ACCUMULATE_DTYPE)

    def backward(grad: np.ndarray) -> tuple:
        grad64 = grad.astype(ACCUMULATE_DTYPE, copy=False)
        return grad64 @ w64, grad64.T @ x64, grad64.sum(axis=0)

    return Tensor.from_op(out.astype(x.dtype), (x, weight, bias), backward)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise log-softmax stabilized by max subtraction."""
    logits = np.asarray(logits, dtype=ACCUMULATE_DTYPE)
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax_cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean negative log-probability of the true class (0 = spoof, 1 = bonafide)."""
    labels = np.asarray(labels)
    if logits.data.ndim != 2 or labels.shape != (logits.shape[0],):
        message = f"logits {logits.shape} and labels {labels.shape} do not align"
        raise ShapeMismatchError(message)
    if np.any((labels < 0) | (labels >= logits.shape[1])) or logits.shape[1] != NUM_CLASSES:
        message = f"labels must be in [0, {NUM_CLASSES}) for {logits.shape[1]} logits"
        raise ValueError(message)

    batch = logits.shape[0]
    rows = np.arange(batch)
    log_probs = log_softmax(logits.data)
    loss = -log_probs[rows, labels].mean()

    def backward(grad: np.ndarray) -> tuple:
        probs = np.exp(log_probs)
        probs[rows, labels] -= 1.0
        return (probs * (float(grad) / batch),)

    return Tensor.from_op(np.asarray(loss, dtype=logits.dtype), (logits,), backward)
